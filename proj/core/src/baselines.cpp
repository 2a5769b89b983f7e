#include "tsso/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>
#include <unordered_map>

#include "tsso/errors.hpp"
#include "tsso/risk.hpp"
#include "tsso/rng.hpp"

namespace tsso {

namespace {

constexpr std::uint64_t kRlStream = 1;
constexpr std::uint64_t kLsStream = 2;

const Network& require_network(const StrategyInputs& in, const char* who) {
  if (!in.network) throw ConfigError(std::string(who) + " needs the network");
  return *in.network;
}

// Placement = the k best-scored ground positions (descending score, ties to
// the lower line id), schedules solved exactly within the placement.
DtrPlan index_plan(const TssoProblem& problem, const std::vector<double>& score,
                   const std::string& name) {
  const int n = problem.num_ground();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&score](int a, int b) { return score[static_cast<std::size_t>(a)] >
                                                   score[static_cast<std::size_t>(b)]; });
  std::uint64_t placement = 0;
  for (int j = 0; j < problem.k; ++j)
    placement |= std::uint64_t{1} << order[static_cast<std::size_t>(j)];

  DtrPlan plan;
  plan.strategy = name;
  plan.placement = placement;
  plan.schedules.resize(problem.sub_fns.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.sub_fns.size(); ++i) {
    const InnerSolution sol = brute_force_inner(problem.sub_fns[i], placement, problem.k_c2[i]);
    plan.schedules[i] = sol.mask;
    sum += sol.value;
  }
  plan.value = sum / static_cast<double>(problem.sub_fns.size());
  return plan;
}

// Map ground positions to network line positions once.
std::vector<int> ground_net_positions(const TssoProblem& problem, const Network& net) {
  std::vector<int> pos;
  pos.reserve(problem.ground.size());
  for (int id : problem.ground) pos.push_back(net.line_pos(id));
  return pos;
}

DtrPlan random_lines(const TssoProblem& problem, std::uint64_t seed) {
  const int n = problem.num_ground();
  std::vector<int> positions(static_cast<std::size_t>(n));
  std::iota(positions.begin(), positions.end(), 0);
  SplitMix64 rng(mix_key(seed, kRlStream));
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < problem.k; ++j) {
    const std::size_t pick = j + rng.index(static_cast<std::size_t>(n - j));
    std::swap(positions[static_cast<std::size_t>(j)], positions[pick]);
    score[static_cast<std::size_t>(positions[static_cast<std::size_t>(j)])] = 1.0;
  }
  return index_plan(problem, score, "RL");
}

DtrPlan failure_rank(const TssoProblem& problem, const StrategyInputs& inputs) {
  const Network& net = require_network(inputs, "FR");
  if (!inputs.db) throw ConfigError("FR needs the chain database");
  const std::vector<int> net_pos = ground_net_positions(problem, net);
  std::vector<double> score(problem.ground.size(), 0.0);
  for (const std::vector<FailureChain>& chains : inputs.db->states)
    for (const FailureChain& chain : chains)
      for (std::size_t g = 0; g < net_pos.size(); ++g)
        if (chain.first_failure[static_cast<std::size_t>(net_pos[g])] !=
            FailureChain::kNeverFails)
          score[g] += 1.0;
  return index_plan(problem, score, "FR");
}

DtrPlan flow_rank(const TssoProblem& problem, const StrategyInputs& inputs) {
  const Network& net = require_network(inputs, "LPF");
  const std::vector<int> net_pos = ground_net_positions(problem, net);
  std::vector<double> score(problem.ground.size(), 0.0);
  if (inputs.states && !inputs.states->empty()) {
    for (const SystemState& state : *inputs.states) {
      const Network scaled = apply_state(net, state);
      const FlowSolution sol = dc_power_flow(scaled);
      for (std::size_t g = 0; g < net_pos.size(); ++g)
        score[g] += std::abs(sol.flow[static_cast<std::size_t>(net_pos[g])]) * state.duration;
    }
  } else {
    const FlowSolution sol = dc_power_flow(net);
    for (std::size_t g = 0; g < net_pos.size(); ++g)
      score[g] = std::abs(sol.flow[static_cast<std::size_t>(net_pos[g])]);
  }
  return index_plan(problem, score, "LPF");
}

DtrPlan hidden_failure_rank(const TssoProblem& problem, const StrategyInputs& inputs) {
  const Network& net = require_network(inputs, "LHF");
  if (!inputs.params) throw ConfigError("LHF needs the risk parameters");
  const std::vector<int> net_pos = ground_net_positions(problem, net);
  std::vector<double> score(problem.ground.size(), 0.0);
  std::vector<std::uint8_t> in_service(net.lines.size(), 1);
  for (std::size_t out = 0; out < net.lines.size(); ++out) {
    in_service[out] = 0;
    const FlowSolution sol = dc_power_flow(net, in_service);
    in_service[out] = 1;
    for (std::size_t g = 0; g < net_pos.size(); ++g) {
      const std::size_t pos = static_cast<std::size_t>(net_pos[g]);
      if (pos == out) continue;
      const double phi = failure_probability(sol.flow[pos], net.lines[pos], *inputs.params,
                                             /*with_dtr=*/false);
      score[g] = std::max(score[g], phi);
    }
  }
  return index_plan(problem, score, "LHF");
}

// Exact objective of a placement: every state's schedule solved to optimality
// within it.
double exact_objective(const TssoProblem& problem, std::uint64_t placement) {
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.sub_fns.size(); ++i)
    sum += brute_force_inner(problem.sub_fns[i], placement, problem.k_c2[i]).value;
  return sum / static_cast<double>(problem.sub_fns.size());
}

DtrPlan greedy_strategy(const TssoProblem& problem) {
  DtrPlan plan;
  plan.strategy = "GS";
  double current = exact_objective(problem, 0);
  for (int j = 0; j < problem.k; ++j) {
    int best_x = -1;
    double best_value = current;
    std::uint64_t rest = problem.ground_mask() & ~plan.placement;
    while (rest) {
      const int x = std::countr_zero(rest);
      rest &= rest - 1;
      const double value = exact_objective(problem, plan.placement | (std::uint64_t{1} << x));
      if (value > best_value) {
        best_value = value;
        best_x = x;
      }
    }
    if (best_x < 0) {
      plan.stopped_early = true;
      break;
    }
    plan.placement |= std::uint64_t{1} << best_x;
    current = best_value;
  }
  plan.schedules.resize(problem.sub_fns.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.sub_fns.size(); ++i) {
    const InnerSolution sol = greedy_inner(problem.sub_fns[i], plan.placement, problem.k_c2[i]);
    plan.schedules[i] = sol.mask;
    sum += sol.value;
  }
  plan.value = sum / static_cast<double>(problem.sub_fns.size());
  return plan;
}

DtrPlan modular_approximation(const TssoProblem& problem) {
  const int n = problem.num_ground();
  const std::size_t m = problem.sub_fns.size();
  std::vector<std::vector<double>> weight(m, std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (int x = 0; x < n; ++x) {
      const double w = problem.sub_fns[i](std::uint64_t{1} << x);
      weight[i][static_cast<std::size_t>(x)] = w;
      score[static_cast<std::size_t>(x)] += w;
    }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&score](int a, int b) { return score[static_cast<std::size_t>(a)] >
                                                   score[static_cast<std::size_t>(b)]; });
  DtrPlan plan;
  plan.strategy = "MA";
  std::vector<int> placed;
  for (int j = 0; j < problem.k; ++j) {
    placed.push_back(order[static_cast<std::size_t>(j)]);
    plan.placement |= std::uint64_t{1} << order[static_cast<std::size_t>(j)];
  }
  std::sort(placed.begin(), placed.end());

  plan.schedules.resize(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<int> by_weight = placed;
    std::stable_sort(by_weight.begin(), by_weight.end(), [&](int a, int b) {
      return weight[i][static_cast<std::size_t>(a)] > weight[i][static_cast<std::size_t>(b)];
    });
    std::uint64_t t = 0;
    int taken = 0;
    for (int x : by_weight) {
      if (taken == problem.k_c2[i]) break;
      if (!(weight[i][static_cast<std::size_t>(x)] > 0.0)) break;
      t |= std::uint64_t{1} << x;
      ++taken;
    }
    plan.schedules[i] = t;
    sum += problem.sub_fns[i](t);
  }
  plan.value = sum / static_cast<double>(m);
  return plan;
}

DtrPlan local_search(const TssoProblem& problem, const StrategyInputs& inputs,
                     std::uint64_t seed) {
  const int n = problem.num_ground();
  std::vector<int> positions(static_cast<std::size_t>(n));
  std::iota(positions.begin(), positions.end(), 0);
  SplitMix64 rng(mix_key(seed, kLsStream));
  std::uint64_t placement = 0;
  for (int j = 0; j < problem.k; ++j) {
    const std::size_t pick = j + rng.index(static_cast<std::size_t>(n - j));
    std::swap(positions[static_cast<std::size_t>(j)], positions[pick]);
    placement |= std::uint64_t{1} << positions[static_cast<std::size_t>(j)];
  }

  std::unordered_map<std::uint64_t, double> cache;
  const auto objective = [&](std::uint64_t s) {
    if (const auto it = cache.find(s); it != cache.end()) return it->second;
    const double value = exact_objective(problem, s);
    cache.emplace(s, value);
    return value;
  };

  DtrPlan plan;
  plan.strategy = "LS";
  double current = objective(placement);
  for (int pass = 0;; ++pass) {
    if (pass == inputs.ls_pass_budget) {
      plan.budget_hit = true;
      break;
    }
    std::uint64_t best_s = placement;
    double best_value = current;
    std::uint64_t outs = placement;
    while (outs) {
      const std::uint64_t ybit = outs & (~outs + 1);
      outs &= outs - 1;
      std::uint64_t ins = problem.ground_mask() & ~placement;
      while (ins) {
        const std::uint64_t xbit = ins & (~ins + 1);
        ins &= ins - 1;
        const std::uint64_t swapped = (placement & ~ybit) | xbit;
        const double value = objective(swapped);
        if (value > best_value) {
          best_value = value;
          best_s = swapped;
        }
      }
    }
    if (best_value <= current + 1e-12) break;  // 1-swap local optimum
    placement = best_s;
    current = best_value;
  }

  plan.placement = placement;
  plan.schedules.resize(problem.sub_fns.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.sub_fns.size(); ++i) {
    const InnerSolution sol = brute_force_inner(problem.sub_fns[i], placement, problem.k_c2[i]);
    plan.schedules[i] = sol.mask;
    sum += sol.value;
  }
  plan.value = sum / static_cast<double>(problem.sub_fns.size());
  return plan;
}

}  // namespace

StrategyKind strategy_from_string(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "scg") return StrategyKind::Scg;
  if (lower == "rl") return StrategyKind::Rl;
  if (lower == "fr") return StrategyKind::Fr;
  if (lower == "lpf") return StrategyKind::Lpf;
  if (lower == "lhf") return StrategyKind::Lhf;
  if (lower == "gs") return StrategyKind::Gs;
  if (lower == "ma") return StrategyKind::Ma;
  if (lower == "ls") return StrategyKind::Ls;
  if (lower == "rg") return StrategyKind::Rg;
  if (lower == "gpg") return StrategyKind::Gpg;
  if (lower == "gcg") return StrategyKind::Gcg;
  throw ConfigError("unknown strategy '" + name + "'");
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Scg: return "SCG";
    case StrategyKind::Rl: return "RL";
    case StrategyKind::Fr: return "FR";
    case StrategyKind::Lpf: return "LPF";
    case StrategyKind::Lhf: return "LHF";
    case StrategyKind::Gs: return "GS";
    case StrategyKind::Ma: return "MA";
    case StrategyKind::Ls: return "LS";
    case StrategyKind::Rg: return "RG";
    case StrategyKind::Gpg: return "GPG";
    case StrategyKind::Gcg: return "GCG";
  }
  throw ConfigError("unknown strategy kind");
}

std::vector<StrategyKind> all_strategies() {
  return {StrategyKind::Scg, StrategyKind::Rl,  StrategyKind::Fr, StrategyKind::Lpf,
          StrategyKind::Lhf, StrategyKind::Gs,  StrategyKind::Ma, StrategyKind::Ls,
          StrategyKind::Rg,  StrategyKind::Gpg, StrategyKind::Gcg};
}

DtrPlan run_strategy(StrategyKind kind, const TssoProblem& problem, const StrategyInputs& inputs,
                     std::uint64_t seed) {
  problem.validate();
  switch (kind) {
    case StrategyKind::Rl: return random_lines(problem, seed);
    case StrategyKind::Fr: return failure_rank(problem, inputs);
    case StrategyKind::Lpf: return flow_rank(problem, inputs);
    case StrategyKind::Lhf: return hidden_failure_rank(problem, inputs);
    case StrategyKind::Gs: return greedy_strategy(problem);
    case StrategyKind::Ma: return modular_approximation(problem);
    case StrategyKind::Ls: return local_search(problem, inputs, seed);
    case StrategyKind::Scg:
    case StrategyKind::Rg:
    case StrategyKind::Gpg:
    case StrategyKind::Gcg: {
      const Decomposition decomp = modular_decomposition(problem);
      switch (kind) {
        case StrategyKind::Scg: return solve_scg(problem, decomp);
        case StrategyKind::Rg:
          return solve_replacement_greedy(problem, decomp, rg_schedule(problem.k), "RG", false);
        case StrategyKind::Gpg:
          return solve_replacement_greedy(problem, decomp, gpg_schedule(problem.k), "GPG", false);
        default:
          return solve_replacement_greedy(problem, decomp, gcg_schedule(problem.k, problem.p),
                                          "GCG", false);
      }
    }
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace tsso
