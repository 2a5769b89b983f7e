#include "tsso/submodular.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "tsso/errors.hpp"

namespace tsso {

namespace {

constexpr int kInnerEnumLimit = 20;
constexpr int kSubmodCheckLimit = 12;
constexpr int kMonotoneCheckLimit = 16;
constexpr double kTssoEvalBudget = 5e7;

std::uint64_t lowest_bit(std::uint64_t x) { return x & (~x + 1); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Advance s to the next mask with the same popcount (Gosper); false when the
// enumeration over n-bit masks is exhausted.
bool next_k_subset(std::uint64_t& s, int n) {
  const std::uint64_t c = lowest_bit(s);
  const std::uint64_t r = s + c;
  if (r < s) return false;  // carried out of 64 bits
  s = (((r ^ s) >> 2) / c) | r;
  return n >= 64 || (s >> n) == 0;
}

}  // namespace

bool mask_lex_less(std::uint64_t a, std::uint64_t b) {
  if (a == b) return false;
  const std::uint64_t low = lowest_bit(a ^ b);
  const std::uint64_t above = ~((low << 1) - 1) & ~low;
  // The sequences agree below the lowest differing element. If a holds that
  // element, a is smaller exactly when b still has elements beyond it;
  // otherwise a is smaller exactly when a is a proper prefix.
  if (a & low) return (b & above) != 0;
  return (a & above) == 0;
}

SetFn memoized(SetFn f) {
  struct Cache {
    std::mutex mutex;
    std::unordered_map<std::uint64_t, double> map;
  };
  auto cache = std::make_shared<Cache>();
  return [f = std::move(f), cache](std::uint64_t mask) {
    {
      std::lock_guard<std::mutex> lock(cache->mutex);
      if (const auto it = cache->map.find(mask); it != cache->map.end()) return it->second;
    }
    const double value = f(mask);
    std::lock_guard<std::mutex> lock(cache->mutex);
    cache->map.emplace(mask, value);
    return value;
  };
}

std::uint64_t TssoProblem::mask_of(const std::vector<int>& ids) const {
  std::uint64_t mask = 0;
  for (int id : ids) {
    const auto it = std::lower_bound(ground.begin(), ground.end(), id);
    if (it == ground.end() || *it != id)
      throw ConfigError("line " + std::to_string(id) + " is not in the ground set");
    mask |= std::uint64_t{1} << (it - ground.begin());
  }
  return mask;
}

std::vector<int> TssoProblem::ids_of(std::uint64_t mask) const {
  std::vector<int> ids;
  while (mask) {
    ids.push_back(ground[static_cast<std::size_t>(std::countr_zero(mask))]);
    mask &= mask - 1;
  }
  return ids;
}

void TssoProblem::validate() const {
  if (ground.empty()) throw ConfigError("ground set is empty");
  if (ground.size() > 64) throw ConfigError("ground set exceeds 64 lines");
  for (std::size_t i = 1; i < ground.size(); ++i)
    if (ground[i - 1] >= ground[i])
      throw ConfigError("ground set must be strictly ascending line ids");
  if (sub_fns.empty()) throw ConfigError("problem needs at least one state");
  for (const SetFn& f : sub_fns)
    if (!f) throw ConfigError("missing sub-function oracle");
  if (k_c2.size() != sub_fns.size())
    throw ConfigError("k_c2 needs one entry per state");
  if (k < 1 || k > num_ground())
    throw ConfigError("first-stage cardinality k must lie in [1, |ground|]");
  for (int kc : k_c2)
    if (kc < 1 || kc > k) throw ConfigError("each k_c2[i] must lie in [1, k]");
  if (p < 1) throw ConfigError("p must be >= 1");
  if (s_l1 & ~ground_mask()) throw ConfigError("partition block is not within the ground set");
}

double Decomposition::c_of(int state, std::uint64_t mask) const {
  const std::vector<double>& row = c.at(static_cast<std::size_t>(state));
  double sum = 0.0;
  while (mask) {
    sum += row[static_cast<std::size_t>(std::countr_zero(mask))];
    mask &= mask - 1;
  }
  return sum;
}

SetFn Decomposition::g_of(const TssoProblem& problem, int state) const {
  const SetFn f = problem.sub_fns.at(static_cast<std::size_t>(state));
  const std::vector<double> row = c.at(static_cast<std::size_t>(state));
  return [f, row](std::uint64_t mask) {
    double sum = 0.0;
    std::uint64_t rest = mask;
    while (rest) {
      sum += row[static_cast<std::size_t>(std::countr_zero(rest))];
      rest &= rest - 1;
    }
    return f(mask) - sum;
  };
}

Decomposition modular_decomposition(const TssoProblem& problem) {
  problem.validate();
  const std::uint64_t l1 = problem.s_l1;
  const std::uint64_t l2 = problem.s_l2();
  Decomposition d;
  d.c.resize(problem.sub_fns.size());
  for (std::size_t i = 0; i < problem.sub_fns.size(); ++i) {
    const SetFn& f = problem.sub_fns[i];
    std::vector<double>& row = d.c[i];
    row.assign(problem.ground.size(), 0.0);
    const double f_l1 = f(l1);
    const double f_l2 = f(l2);
    for (std::size_t x = 0; x < problem.ground.size(); ++x) {
      const std::uint64_t bit = std::uint64_t{1} << x;
      row[x] = (l1 & bit) ? f_l1 - f(l1 & ~bit) : f_l2 - f(l2 & ~bit);
    }
  }
  return d;
}

double curvature(const SetFn& f, std::uint64_t ground, std::vector<std::string>* warnings) {
  if (ground == 0) throw ConfigError("curvature needs a nonempty ground set");
  const double f_empty = f(0);
  if (std::abs(f_empty) > 1e-9)
    throw ConfigError("curvature needs f(empty) = 0, got " + std::to_string(f_empty));
  const double f_full = f(ground);
  double min_ratio = std::numeric_limits<double>::infinity();
  std::uint64_t rest = ground;
  while (rest) {
    const int pos = std::countr_zero(rest);
    const std::uint64_t bit = lowest_bit(rest);
    rest &= rest - 1;
    const double singleton = f(bit) - f_empty;
    if (!(singleton > 0.0)) {
      if (warnings)
        warnings->push_back("curvature: skipped ground position " + std::to_string(pos) +
                            " (nonpositive singleton value)");
      continue;
    }
    min_ratio = std::min(min_ratio, (f_full - f(ground & ~bit)) / singleton);
  }
  if (!std::isfinite(min_ratio))
    throw NumericError("curvature undefined: every singleton value is nonpositive");
  return 1.0 - min_ratio;
}

std::pair<double, double> separate_curvatures(const SetFn& f, const TssoProblem& problem,
                                              std::vector<std::string>* warnings) {
  problem.validate();
  const std::uint64_t l1 = problem.s_l1;
  const std::uint64_t l2 = problem.s_l2();
  if (l1 == 0) throw ConfigError("separate curvatures need a nonempty first block");
  if (l2 == 0) {
    // Degenerate partition: the first block is the whole ground, so the
    // first curvature reduces to the plain total curvature and the second
    // has no elements to range over.
    if (warnings) {
      warnings->push_back("second partition block empty; kappa_f2 set to 0");
    }
    return {curvature(f, l1, warnings), 0.0};
  }
  return {curvature(f, l1, warnings), curvature(f, l2, warnings)};
}

InnerSolution brute_force_inner(const SetFn& f, std::uint64_t feasible, int k_c2) {
  if (std::popcount(feasible) > kInnerEnumLimit)
    throw ConfigError("inner enumeration guard: feasible set exceeds " +
                      std::to_string(kInnerEnumLimit) + " lines");
  if (k_c2 < 0) throw ConfigError("negative second-stage cardinality");
  InnerSolution best{0, f(0)};
  std::uint64_t sub = feasible;
  while (sub) {
    if (std::popcount(sub) <= k_c2) {
      const double value = f(sub);
      if (value > best.value || (value == best.value && mask_lex_less(sub, best.mask)))
        best = {sub, value};
    }
    sub = (sub - 1) & feasible;
  }
  return best;
}

InnerSolution greedy_inner(const SetFn& f, std::uint64_t feasible, int k_c2) {
  if (k_c2 < 0) throw ConfigError("negative second-stage cardinality");
  InnerSolution current{0, f(0)};
  for (int round = 0; round < k_c2; ++round) {
    int best_pos = -1;
    double best_value = current.value;
    std::uint64_t rest = feasible & ~current.mask;
    while (rest) {
      const int pos = std::countr_zero(rest);
      const std::uint64_t bit = lowest_bit(rest);
      rest &= rest - 1;
      const double value = f(current.mask | bit);
      if (value > best_value) {
        best_value = value;
        best_pos = pos;
      }
    }
    if (best_pos < 0) break;
    current.mask |= std::uint64_t{1} << best_pos;
    current.value = best_value;
  }
  return current;
}

bool tsso_enumeration_feasible(const TssoProblem& problem) {
  const int n = problem.num_ground();
  const int m = problem.num_states();
  const int k = problem.k;
  double inner_per_candidate = 0.0;
  for (int i = 0; i < m; ++i)
    for (int s = 0; s <= std::min(problem.k_c2[static_cast<std::size_t>(i)], k); ++s)
      inner_per_candidate += binomial(k, s);
  return binomial(n, k) * inner_per_candidate <= kTssoEvalBudget;
}

TssoSolution brute_force_tsso(const TssoProblem& problem) {
  problem.validate();
  const int n = problem.num_ground();
  const int m = problem.num_states();
  const int k = problem.k;

  if (!tsso_enumeration_feasible(problem))
    throw ConfigError("two-stage enumeration budget exceeded; shrink the instance");

  TssoSolution best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> schedules(static_cast<std::size_t>(m));
  std::vector<double> values(static_cast<std::size_t>(m));
  std::uint64_t s = k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  while (true) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const InnerSolution sol = brute_force_inner(problem.sub_fns[static_cast<std::size_t>(i)],
                                                  s, problem.k_c2[static_cast<std::size_t>(i)]);
      schedules[static_cast<std::size_t>(i)] = sol.mask;
      values[static_cast<std::size_t>(i)] = sol.value;
      sum += sol.value;
    }
    const double value = sum / m;
    if (value > best.value || (value == best.value && mask_lex_less(s, best.s_mask))) {
      best.s_mask = s;
      best.value = value;
      best.schedules = schedules;
      best.state_values = values;
    }
    if (!next_k_subset(s, n)) break;
  }
  return best;
}

double general_sampling_weight(const SetFn& f, std::uint64_t set_a, std::uint64_t set_b,
                               int k_c2) {
  const double ref = brute_force_inner(f, set_a, k_c2).value;
  const double next = brute_force_inner(f, set_b, k_c2).value;
  if (ref == 0.0)
    throw NumericError("general sampling weight undefined: reference optimum is zero");
  return next / ref;
}

namespace {

// Compact <-> actual mask mapping for the exhaustive checkers: compact bit i
// stands for the i-th set bit of `ground`.
struct CompactGround {
  std::vector<int> pos;

  explicit CompactGround(std::uint64_t ground) {
    while (ground) {
      pos.push_back(std::countr_zero(ground));
      ground &= ground - 1;
    }
  }
  int size() const { return static_cast<int>(pos.size()); }
  std::uint64_t expand(std::uint64_t compact) const {
    std::uint64_t actual = 0;
    while (compact) {
      actual |= std::uint64_t{1} << pos[static_cast<std::size_t>(std::countr_zero(compact))];
      compact &= compact - 1;
    }
    return actual;
  }
};

std::vector<double> value_table(const SetFn& f, const CompactGround& cg) {
  const std::size_t size = std::size_t{1} << cg.size();
  std::vector<double> table(size);
  for (std::size_t c = 0; c < size; ++c) table[c] = f(cg.expand(c));
  return table;
}

}  // namespace

std::vector<SubmodularityViolation> check_submodularity(const SetFn& f, std::uint64_t ground,
                                                        double tol) {
  const CompactGround cg(ground);
  if (cg.size() > kSubmodCheckLimit)
    throw ConfigError("submodularity check guard: ground exceeds " +
                      std::to_string(kSubmodCheckLimit) + " elements");
  const std::vector<double> table = value_table(f, cg);
  const std::uint64_t full = (std::uint64_t{1} << cg.size()) - 1;

  std::vector<SubmodularityViolation> out;
  for (std::uint64_t b = 0; b <= full; ++b) {
    std::uint64_t rest = full & ~b;
    while (rest) {
      const int v = std::countr_zero(rest);
      const std::uint64_t vbit = lowest_bit(rest);
      rest &= rest - 1;
      const double gain_b = table[b | vbit] - table[b];
      std::uint64_t a = b;
      while (true) {
        const double gap = (table[a | vbit] - table[a]) - gain_b;
        if (gap < -tol)
          out.push_back({cg.expand(a), cg.expand(b),
                         cg.pos[static_cast<std::size_t>(v)], gap});
        if (a == 0) break;
        a = (a - 1) & b;
      }
    }
  }
  return out;
}

std::vector<MonotonicityViolation> check_monotonicity(const SetFn& f, std::uint64_t ground,
                                                      double tol) {
  const CompactGround cg(ground);
  if (cg.size() > kMonotoneCheckLimit)
    throw ConfigError("monotonicity check guard: ground exceeds " +
                      std::to_string(kMonotoneCheckLimit) + " elements");
  const std::vector<double> table = value_table(f, cg);
  const std::uint64_t full = (std::uint64_t{1} << cg.size()) - 1;

  std::vector<MonotonicityViolation> out;
  for (std::uint64_t b = 0; b <= full; ++b) {
    std::uint64_t rest = full & ~b;
    while (rest) {
      const int v = std::countr_zero(rest);
      const std::uint64_t vbit = lowest_bit(rest);
      rest &= rest - 1;
      const double gap = table[b | vbit] - table[b];
      if (gap < -tol)
        out.push_back({cg.expand(b), cg.pos[static_cast<std::size_t>(v)], gap});
    }
  }
  return out;
}

}  // namespace tsso
