#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsso/cascade.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk_params.hpp"
#include "tsso/scg.hpp"

namespace tsso {

// The solver under test plus the ten comparison strategies, grouped by how
// they pick the placement: index-ranked (RL random, FR failure count, LPF
// pre-event flow, LHF hidden-failure score), greed-based (GS on the objective,
// MA on a modular surrogate, LS local search), and surrogate-discounted
// replacement greedy (RG, GPG, GCG).
enum class StrategyKind { Scg, Rl, Fr, Lpf, Lhf, Gs, Ma, Ls, Rg, Gpg, Gcg };

StrategyKind strategy_from_string(const std::string& name);  // case-insensitive
std::string strategy_name(StrategyKind kind);
std::vector<StrategyKind> all_strategies();  // SCG first, then the ten

// Shared context beyond the problem itself. Only some strategies read each
// field: FR needs db + network, LPF network + states, LHF network + params;
// everything else runs off the problem's oracles alone.
struct StrategyInputs {
  const Network* network = nullptr;
  const std::vector<SystemState>* states = nullptr;
  const ChainDatabase* db = nullptr;
  const RiskParams* params = nullptr;
  int ls_pass_budget = 50;  // full sweeps before LS gives up
};

// Runs one strategy to a feasible plan (|S| <= k, T_i within S and k_c2[i]).
// The seed feeds only RL's draw and LS's starting placement; every other
// strategy is deterministic in its inputs.
DtrPlan run_strategy(StrategyKind kind, const TssoProblem& problem,
                     const StrategyInputs& inputs, std::uint64_t seed);

}  // namespace tsso
