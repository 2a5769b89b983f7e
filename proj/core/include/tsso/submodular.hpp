#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tsso {

// Set-function oracle over subsets of a fixed ground list, encoded as a
// 64-bit mask of ground positions (bit g = ground[g]).
using SetFn = std::function<double(std::uint64_t)>;

// Lexicographic order on sets written as ascending id sequences: the shared
// prefix is skipped, then the set holding the smaller next element wins, and
// a proper prefix precedes its extensions. Used as the deterministic
// tie-break for every argmax over sets.
bool mask_lex_less(std::uint64_t a, std::uint64_t b);

// Thread-safe memoization wrapper; changes no semantics, only cost.
SetFn memoized(SetFn f);

// Two-stage problem instance: choose S within the ground set, |S| = k, then
// for each state i a schedule T_i subset of S with |T_i| <= k_c2[i], to
// maximize the mean of the per-state objectives.
struct TssoProblem {
  std::vector<int> ground;     // candidate line ids, strictly ascending
  std::vector<SetFn> sub_fns;  // f_i, one per system state
  int k = 1;                   // first-stage cardinality
  std::vector<int> k_c2;       // second-stage cardinality per state
  int p = 1;                   // second-stage constraint count
  std::uint64_t s_l1 = 0;      // first partition block, as a ground mask

  int num_ground() const { return static_cast<int>(ground.size()); }
  int num_states() const { return static_cast<int>(sub_fns.size()); }
  std::uint64_t ground_mask() const {
    return ground.size() >= 64 ? ~std::uint64_t{0}
                               : (std::uint64_t{1} << ground.size()) - 1;
  }
  std::uint64_t s_l2() const { return ground_mask() & ~s_l1; }

  std::uint64_t mask_of(const std::vector<int>& ids) const;  // throws on unknown id
  std::vector<int> ids_of(std::uint64_t mask) const;

  void validate() const;  // throws ConfigError on any broken invariant
};

// Per-state modular lower parts c_i and the induced g_i = f_i - c_i.
// c_i(x) is the marginal of x at the top of its own partition block, so
// c_i(T) is a plain sum of element weights.
struct Decomposition {
  std::vector<std::vector<double>> c;  // [state][ground position]

  double c_of(int state, std::uint64_t mask) const;
  SetFn g_of(const TssoProblem& problem, int state) const;
};

Decomposition modular_decomposition(const TssoProblem& problem);

// Total curvature of f over the given ground mask: 1 - min_j of the ratio
// between j's marginal at the full ground and its singleton value. Elements
// with nonpositive singleton value are skipped with a warning (appended to
// *warnings when given); all-skipped is an error. Lies in [0,1] for monotone
// submodular f.
double curvature(const SetFn& f, std::uint64_t ground,
                 std::vector<std::string>* warnings = nullptr);

// Curvatures of f restricted to the problem's two partition blocks.
std::pair<double, double> separate_curvatures(const SetFn& f, const TssoProblem& problem,
                                              std::vector<std::string>* warnings = nullptr);

struct InnerSolution {
  std::uint64_t mask = 0;
  double value = 0.0;
};

// Exact argmax of f over subsets of `feasible` with at most k_c2 elements
// (the empty set included), ties to the lexicographically smallest set.
// Guarded to |feasible| <= 20.
InnerSolution brute_force_inner(const SetFn& f, std::uint64_t feasible, int k_c2);

// Forward greedy stand-in for brute_force_inner: adds the best element while
// a strictly positive marginal exists, up to k_c2 picks. Ties to the lowest
// ground position. No size guard; linear scans only.
InnerSolution greedy_inner(const SetFn& f, std::uint64_t feasible, int k_c2);

struct TssoSolution {
  std::uint64_t s_mask = 0;              // first-stage placement
  double value = 0.0;                    // mean of per-state optima
  std::vector<std::uint64_t> schedules;  // optimal T_i per state
  std::vector<double> state_values;      // f_i(T_i) per state
};

// Exact two-stage optimum by enumerating every |S| = k placement and solving
// each state's schedule exactly. Guarded by a total-evaluation budget.
TssoSolution brute_force_tsso(const TssoProblem& problem);

// True when brute_force_tsso's evaluation budget admits this instance, so
// callers can fall back to an estimate instead of catching the error.
bool tsso_enumeration_feasible(const TssoProblem& problem);

// Ratio of inner optima f(G(set_b)) / f(G(set_a)); exact 1 for equal sets.
// Throws NumericError when the reference optimum is zero.
double general_sampling_weight(const SetFn& f, std::uint64_t set_a, std::uint64_t set_b,
                               int k_c2);

struct SubmodularityViolation {
  std::uint64_t a = 0;  // ground mask of A
  std::uint64_t b = 0;  // ground mask of B, A subset of B
  int v = 0;            // ground position of the added element, v outside B
  double gap = 0.0;     // [f(A+v)-f(A)] - [f(B+v)-f(B)], < -tol
};

// Exhaustive diminishing-returns check over all (A subset of B, v outside B).
// Empty result = submodular within tolerance. Guarded to |ground| <= 12.
std::vector<SubmodularityViolation> check_submodularity(const SetFn& f, std::uint64_t ground,
                                                        double tol = 1e-9);

struct MonotonicityViolation {
  std::uint64_t b = 0;
  int v = 0;
  double gap = 0.0;  // f(B+v) - f(B), < -tol
};

// Exhaustive monotonicity check over all (B, v outside B); |ground| <= 16.
std::vector<MonotonicityViolation> check_monotonicity(const SetFn& f, std::uint64_t ground,
                                                      double tol = 1e-9);

}  // namespace tsso
