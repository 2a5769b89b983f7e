#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsso/submodular.hpp"

namespace tsso {

// Per-round discount weights for the replacement-greedy engine: round j
// scores an add as beta_g[j] * (g-marginal) + beta_c[j] * c(x), and a swap as
// beta_g[j] * (g-marginal) + beta_c[j] * (c(x) - c(y)). Index 0 carries the
// round-0 weights used only to evaluate the surrogate before the first round.
struct GainSchedule {
  std::vector<double> beta_g;  // size k+1, indexed by round j
  std::vector<double> beta_c;
};

GainSchedule scg_schedule(int k, int p);  // beta_g = (1-p/k)^(k-j), beta_c = 1
GainSchedule rg_schedule(int k);          // both 1 (plain replacement greedy)
GainSchedule gpg_schedule(int k);         // beta_g = (1-2/k)^(k-j), beta_c = 1
GainSchedule gcg_schedule(int k, int p);  // (1-(p+1)/k)^(k-j), (1-p/k)^(k-j)

struct IterationTrace {
  int chosen = -1;                  // ground position of the accepted x^j
  double gain_sum = 0.0;            // sum of per-state dispatcher values for x^j
  std::vector<int> action;          // per state: -2 no change, -1 add, else replaced position
  std::vector<double> applied_gain; // dispatcher value when applied, else 0
  double phi = 0.0;                 // surrogate value after the round
  double identity_residual = 0.0;      // telescoping-identity residual (identity-checked runs)
};

struct DtrPlan {
  std::string strategy;
  std::uint64_t placement = 0;           // S^k as a ground mask
  std::vector<std::uint64_t> schedules;  // T_i^k per state
  std::vector<IterationTrace> trace;
  double value = 0.0;        // (1/m) sum_i f_i(T_i^k)
  bool stopped_early = false;  // no strictly positive total gain before round k
  bool budget_hit = false;     // local-search pass budget exhausted (LS only)
};

// The k-round replacement-greedy engine shared by the surrogate strategies.
// Each round picks the candidate x maximizing the summed per-state dispatcher
// gain (feasible add: raw discounted gain; full schedule: best swap clamped
// at 0), accepts it only when the sum is strictly positive, and applies the
// per-state update only where that state's gain is strictly positive.
// check_identity additionally computes the per-round surrogate telescoping
// residual and folds it into the process-wide tally below.
DtrPlan solve_replacement_greedy(const TssoProblem& problem, const Decomposition& decomp,
                                 const GainSchedule& schedule, const std::string& name,
                                 bool check_identity);

// The engine under the separate-curvature weights, with the identity check on.
DtrPlan solve_scg(const TssoProblem& problem, const Decomposition& decomp);

// Process-wide tally of surrogate telescoping residuals across every
// identity-checked solve, for end-of-run verification.
struct IdentityCheckStats {
  std::uint64_t runs = 0;
  std::uint64_t iterations = 0;
  double max_residual = 0.0;
};
IdentityCheckStats identity_check_stats();
void reset_identity_check_stats();

// Pure approximation guarantee 1 - kappa*e^(-p)/p + kappa/p - kappa.
double pure_guarantee(double kappa_f1, int p);

// Error form (kappa_f1 - 1)*o_xi + (1 - 1/p + e^(-p)/p - o_xi)*o_c2.
double combined_error(double kappa_f1, double o_xi, double o_c2, int p);

struct GuaranteeReport {
  double kappa_f1 = 0.0;  // max over states (weakest pure guarantee)
  double kappa_f2 = 0.0;  // min over states
  std::vector<double> kappa_f1_by_state;
  std::vector<double> kappa_f2_by_state;
  double o_xi = 0.0;       // max_i,j c_i(T_i^{j-1}) / c_i(T_i*)
  double o_c2 = 0.0;       // adversarial pick of the per-state values
  double o_combined = 0.0; // raw error form
  double pure = 0.0;
  double certified = 0.0;  // pure + min(o_combined, 0)
  bool exact = false;      // T_i* from exhaustive search, else greedy stand-in
  bool truncated = false;  // plan stopped before placing k lines
  std::vector<std::string> notes;
};

// Certified guarantee for a finished plan. Exact mode solves the two-stage
// optimum exhaustively to obtain T_i* (sized instances only); estimated mode
// substitutes a greedy stand-in and says so in the notes. Every aggregation
// is chosen so the certified value stays a valid lower bound.
GuaranteeReport guarantee_report(const DtrPlan& plan, const TssoProblem& problem,
                                 const Decomposition& decomp, bool exact);

// Closed-form guarantee surfaces for the strategy families, error terms
// excluded.
double ls_guarantee(int p);                     // 1/(p+1)
double rg_guarantee(int p);                     // (1 - e^(-(p+1)))/(p+1), also GPG
double gcg_guarantee(double kappa, int p);      // curvature-blended form

struct GuaranteeRow {
  double kappa = 0.0;
  int p = 1;
  double scg = 0.0, ls = 0.0, rg = 0.0, gpg = 0.0, gcg = 0.0;
};

std::vector<GuaranteeRow> guarantee_table(const std::vector<double>& kappas,
                                          const std::vector<int>& ps);

}  // namespace tsso
