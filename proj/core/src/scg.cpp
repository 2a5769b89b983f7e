#include "tsso/scg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>

#include "tsso/errors.hpp"

namespace tsso {

namespace {

GainSchedule power_schedule(int k, double g_base, double c_base) {
  if (k < 1) throw ConfigError("gain schedule needs k >= 1");
  GainSchedule s;
  s.beta_g.resize(static_cast<std::size_t>(k) + 1);
  s.beta_c.resize(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) {
    s.beta_g[static_cast<std::size_t>(j)] = std::pow(g_base, k - j);
    s.beta_c[static_cast<std::size_t>(j)] = std::pow(c_base, k - j);
  }
  return s;
}

std::mutex g_identity_mutex;
IdentityCheckStats g_identity_stats;

struct StateChoice {
  double value = 0.0;  // dispatcher gain
  int action = -2;     // -1 add, >= 0 replaced position, -2 nothing beats zero
};

// Per-state dispatcher: a feasible add returns the raw discounted gain (may
// be negative); a full schedule returns the best swap clamped at zero, ties
// to the smallest replaced position.
StateChoice dispatch(const SetFn& f, const std::vector<double>& c_row, std::uint64_t t_mask,
                     int k_c2, int x_pos, double beta_g, double beta_c) {
  const std::uint64_t xbit = std::uint64_t{1} << x_pos;
  const double c_x = c_row[static_cast<std::size_t>(x_pos)];
  const double f_t = f(t_mask);
  StateChoice out;
  if (std::popcount(t_mask) < k_c2) {
    const double marg_g = f(t_mask | xbit) - f_t - c_x;
    out.value = beta_g * marg_g + beta_c * c_x;
    out.action = -1;
    return out;
  }
  std::uint64_t rest = t_mask;
  while (rest) {
    const int y = std::countr_zero(rest);
    const std::uint64_t ybit = rest & (~rest + 1);
    rest &= rest - 1;
    const double c_y = c_row[static_cast<std::size_t>(y)];
    const double marg_g = f((t_mask & ~ybit) | xbit) - f_t - c_x + c_y;
    const double grad = beta_g * marg_g + beta_c * (c_x - c_y);
    if (grad > out.value) {
      out.value = grad;
      out.action = y;
    }
  }
  return out;
}

}  // namespace

GainSchedule scg_schedule(int k, int p) {
  if (p < 1 || p > k) throw ConfigError("discount weights need 1 <= p <= k");
  return power_schedule(k, 1.0 - static_cast<double>(p) / k, 1.0);
}

GainSchedule rg_schedule(int k) { return power_schedule(k, 1.0, 1.0); }

GainSchedule gpg_schedule(int k) { return power_schedule(k, 1.0 - 2.0 / k, 1.0); }

GainSchedule gcg_schedule(int k, int p) {
  if (p < 1) throw ConfigError("discount weights need p >= 1");
  return power_schedule(k, 1.0 - static_cast<double>(p + 1) / k,
                        1.0 - static_cast<double>(p) / k);
}

DtrPlan solve_replacement_greedy(const TssoProblem& problem, const Decomposition& decomp,
                                 const GainSchedule& schedule, const std::string& name,
                                 bool check_identity) {
  problem.validate();
  const int n = problem.num_ground();
  const int m = problem.num_states();
  const int k = problem.k;
  if (schedule.beta_g.size() != static_cast<std::size_t>(k) + 1 ||
      schedule.beta_c.size() != static_cast<std::size_t>(k) + 1)
    throw ConfigError("gain schedule must cover rounds 0..k");
  if (decomp.c.size() != static_cast<std::size_t>(m))
    throw ConfigError("decomposition does not match the problem's state count");
  for (const std::vector<double>& row : decomp.c)
    if (row.size() != static_cast<std::size_t>(n))
      throw ConfigError("decomposition does not match the problem's ground size");

  DtrPlan plan;
  plan.strategy = name;
  plan.schedules.assign(static_cast<std::size_t>(m), 0);

  const auto surrogate = [&](int j) {
    const double bg = schedule.beta_g[static_cast<std::size_t>(j)];
    const double bc = schedule.beta_c[static_cast<std::size_t>(j)];
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const std::uint64_t t = plan.schedules[static_cast<std::size_t>(i)];
      const double ft = problem.sub_fns[static_cast<std::size_t>(i)](t);
      const double ct = decomp.c_of(i, t);
      sum += bg * (ft - ct) + bc * ct;
    }
    return sum;
  };

  double phi_prev = surrogate(0);
  double max_residual = 0.0;

  for (int j = 1; j <= k; ++j) {
    const double bg = schedule.beta_g[static_cast<std::size_t>(j)];
    const double bc = schedule.beta_c[static_cast<std::size_t>(j)];

    int best_x = -1;
    double best_sum = 0.0;  // only strictly positive totals are accepted
    std::uint64_t rest = problem.ground_mask() & ~plan.placement;
    while (rest) {
      const int x = std::countr_zero(rest);
      rest &= rest - 1;
      double sum = 0.0;
      for (int i = 0; i < m; ++i)
        sum += dispatch(problem.sub_fns[static_cast<std::size_t>(i)],
                        decomp.c[static_cast<std::size_t>(i)],
                        plan.schedules[static_cast<std::size_t>(i)],
                        problem.k_c2[static_cast<std::size_t>(i)], x, bg, bc)
                   .value;
      if (sum > best_sum) {
        best_sum = sum;
        best_x = x;
      }
    }
    if (best_x < 0) {
      plan.stopped_early = true;
      break;
    }

    IterationTrace tr;
    tr.chosen = best_x;
    tr.gain_sum = best_sum;
    tr.action.assign(static_cast<std::size_t>(m), -2);
    tr.applied_gain.assign(static_cast<std::size_t>(m), 0.0);
    const std::vector<std::uint64_t> prev = plan.schedules;
    plan.placement |= std::uint64_t{1} << best_x;
    for (int i = 0; i < m; ++i) {
      const StateChoice ch = dispatch(problem.sub_fns[static_cast<std::size_t>(i)],
                                      decomp.c[static_cast<std::size_t>(i)],
                                      prev[static_cast<std::size_t>(i)],
                                      problem.k_c2[static_cast<std::size_t>(i)], best_x, bg, bc);
      if (!(ch.value > 0.0)) continue;
      std::uint64_t next = prev[static_cast<std::size_t>(i)] | (std::uint64_t{1} << best_x);
      if (ch.action >= 0) next &= ~(std::uint64_t{1} << ch.action);
      plan.schedules[static_cast<std::size_t>(i)] = next;
      tr.action[static_cast<std::size_t>(i)] = ch.action;
      tr.applied_gain[static_cast<std::size_t>(i)] = ch.value;
    }
    tr.phi = surrogate(j);
    if (check_identity) {
      // Telescoping identity: the surrogate's step equals the applied gains
      // plus the weight drift over the pre-round sets. For the discounted
      // schedule beta_c is constant and the g drift collapses to the closed
      // form (p/k) * beta_g(j) * g_i.
      const double dbg = bg - schedule.beta_g[static_cast<std::size_t>(j - 1)];
      const double dbc = bc - schedule.beta_c[static_cast<std::size_t>(j - 1)];
      double expected = 0.0;
      for (int i = 0; i < m; ++i) {
        const std::uint64_t t = prev[static_cast<std::size_t>(i)];
        const double c_prev = decomp.c_of(i, t);
        const double g_prev = problem.sub_fns[static_cast<std::size_t>(i)](t) - c_prev;
        expected += tr.applied_gain[static_cast<std::size_t>(i)] + dbg * g_prev + dbc * c_prev;
      }
      tr.identity_residual = std::abs((tr.phi - phi_prev) - expected);
      max_residual = std::max(max_residual, tr.identity_residual);
    }
    phi_prev = tr.phi;
    plan.trace.push_back(std::move(tr));
  }

  double sum = 0.0;
  for (int i = 0; i < m; ++i)
    sum += problem.sub_fns[static_cast<std::size_t>(i)](plan.schedules[static_cast<std::size_t>(i)]);
  plan.value = sum / m;

  if (check_identity) {
    std::lock_guard<std::mutex> lock(g_identity_mutex);
    g_identity_stats.runs += 1;
    g_identity_stats.iterations += plan.trace.size();
    g_identity_stats.max_residual = std::max(g_identity_stats.max_residual, max_residual);
  }
  return plan;
}

DtrPlan solve_scg(const TssoProblem& problem, const Decomposition& decomp) {
  return solve_replacement_greedy(problem, decomp, scg_schedule(problem.k, problem.p), "SCG",
                                  /*check_identity=*/true);
}

IdentityCheckStats identity_check_stats() {
  std::lock_guard<std::mutex> lock(g_identity_mutex);
  return g_identity_stats;
}

void reset_identity_check_stats() {
  std::lock_guard<std::mutex> lock(g_identity_mutex);
  g_identity_stats = IdentityCheckStats{};
}

double pure_guarantee(double kappa_f1, int p) {
  if (p < 1) throw ConfigError("guarantee formulas need p >= 1");
  const double pd = p;
  return 1.0 - kappa_f1 * std::exp(-pd) / pd + kappa_f1 / pd - kappa_f1;
}

double combined_error(double kappa_f1, double o_xi, double o_c2, int p) {
  if (p < 1) throw ConfigError("guarantee formulas need p >= 1");
  const double pd = p;
  return (kappa_f1 - 1.0) * o_xi + (1.0 - 1.0 / pd + std::exp(-pd) / pd - o_xi) * o_c2;
}

GuaranteeReport guarantee_report(const DtrPlan& plan, const TssoProblem& problem,
                                 const Decomposition& decomp, bool exact) {
  problem.validate();
  const int m = problem.num_states();
  GuaranteeReport rep;
  rep.exact = exact;
  rep.truncated = std::popcount(plan.placement) < problem.k;
  if (rep.truncated)
    rep.notes.push_back("placement stopped early with " +
                        std::to_string(std::popcount(plan.placement)) + " of " +
                        std::to_string(problem.k) + " lines");

  rep.kappa_f1_by_state.resize(static_cast<std::size_t>(m));
  rep.kappa_f2_by_state.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::vector<std::string> warnings;
    const auto [k1, k2] =
        separate_curvatures(problem.sub_fns[static_cast<std::size_t>(i)], problem, &warnings);
    rep.kappa_f1_by_state[static_cast<std::size_t>(i)] = k1;
    rep.kappa_f2_by_state[static_cast<std::size_t>(i)] = k2;
    for (const std::string& w : warnings)
      rep.notes.push_back("state " + std::to_string(i) + ": " + w);
  }
  rep.kappa_f1 = *std::max_element(rep.kappa_f1_by_state.begin(), rep.kappa_f1_by_state.end());
  rep.kappa_f2 = *std::min_element(rep.kappa_f2_by_state.begin(), rep.kappa_f2_by_state.end());

  std::vector<std::uint64_t> t_star(static_cast<std::size_t>(m), 0);
  if (exact) {
    t_star = brute_force_tsso(problem).schedules;
  } else {
    rep.notes.push_back("estimated mode: optimal schedules replaced by greedy stand-ins");
    for (int i = 0; i < m; ++i)
      t_star[static_cast<std::size_t>(i)] =
          greedy_inner(problem.sub_fns[static_cast<std::size_t>(i)], problem.ground_mask(),
                       problem.k_c2[static_cast<std::size_t>(i)])
              .mask;
  }

  // O(xi): largest ratio between a pre-round schedule's modular weight and
  // the optimal schedule's, over every state and executed round.
  double o_xi = 0.0;
  bool xi_degenerate = false;
  for (int i = 0; i < m; ++i) {
    const double denom = decomp.c_of(i, t_star[static_cast<std::size_t>(i)]);
    std::uint64_t t = 0;
    for (const IterationTrace& tr : plan.trace) {
      const double num = decomp.c_of(i, t);
      if (denom > 0.0) {
        o_xi = std::max(o_xi, num / denom);
      } else if (num != 0.0) {
        xi_degenerate = true;
        o_xi = std::max(o_xi, 1.0);
      }
      const int action = tr.action[static_cast<std::size_t>(i)];
      if (action == -1) {
        t |= std::uint64_t{1} << tr.chosen;
      } else if (action >= 0) {
        t = (t & ~(std::uint64_t{1} << action)) | (std::uint64_t{1} << tr.chosen);
      }
    }
  }
  if (xi_degenerate)
    rep.notes.push_back(
        "a schedule carried modular weight while the optimal one had none; that ratio "
        "was taken as 1");
  rep.o_xi = o_xi;

  std::vector<double> o_c2_by_state(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const SetFn& f = problem.sub_fns[static_cast<std::size_t>(i)];
    const double f_star = f(t_star[static_cast<std::size_t>(i)]);
    if (f_star == 0.0) {
      rep.notes.push_back("state " + std::to_string(i) +
                          ": optimal schedule value is zero; its error share taken as 0");
      continue;
    }
    const double share = f(t_star[static_cast<std::size_t>(i)] & problem.s_l2()) / f_star;
    o_c2_by_state[static_cast<std::size_t>(i)] =
        (rep.kappa_f1_by_state[static_cast<std::size_t>(i)] -
         rep.kappa_f2_by_state[static_cast<std::size_t>(i)]) *
        share;
  }

  const int p = problem.p;
  const double pd = p;
  const double coeff = 1.0 - 1.0 / pd + std::exp(-pd) / pd - o_xi;
  rep.o_c2 = coeff >= 0.0
                 ? *std::min_element(o_c2_by_state.begin(), o_c2_by_state.end())
                 : *std::max_element(o_c2_by_state.begin(), o_c2_by_state.end());
  const double kappa_min =
      *std::min_element(rep.kappa_f1_by_state.begin(), rep.kappa_f1_by_state.end());
  rep.o_combined = combined_error(kappa_min, o_xi, rep.o_c2, p);
  rep.pure = pure_guarantee(rep.kappa_f1, p);
  rep.certified = rep.pure + std::min(rep.o_combined, 0.0);
  if (rep.o_combined > 0.0)
    rep.notes.push_back("error form came out positive; certified bound clamped at the pure one");
  return rep;
}

double ls_guarantee(int p) {
  if (p < 1) throw ConfigError("guarantee formulas need p >= 1");
  return 1.0 / (p + 1.0);
}

double rg_guarantee(int p) {
  if (p < 1) throw ConfigError("guarantee formulas need p >= 1");
  return (1.0 - std::exp(-(p + 1.0))) / (p + 1.0);
}

double gcg_guarantee(double kappa, int p) {
  if (p < 1) throw ConfigError("guarantee formulas need p >= 1");
  const double pd = p;
  return (1.0 - kappa) / pd * (1.0 - std::exp(-pd)) +
         kappa / (pd + 1.0) * (1.0 - std::exp(-(pd + 1.0)));
}

std::vector<GuaranteeRow> guarantee_table(const std::vector<double>& kappas,
                                          const std::vector<int>& ps) {
  std::vector<GuaranteeRow> rows;
  rows.reserve(kappas.size() * ps.size());
  for (const double kappa : kappas) {
    if (!(kappa >= 0.0 && kappa <= 1.0))
      throw ConfigError("guarantee table needs curvature values in [0, 1]");
    for (const int p : ps) {
      GuaranteeRow row;
      row.kappa = kappa;
      row.p = p;
      row.scg = pure_guarantee(kappa, p);
      row.ls = ls_guarantee(p);
      row.rg = rg_guarantee(p);
      row.gpg = rg_guarantee(p);
      row.gcg = gcg_guarantee(kappa, p);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace tsso
