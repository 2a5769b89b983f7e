#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>
#include <vector>

#include "tsso/cascade.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk_params.hpp"

namespace tsso {

// DtrSet: line ids currently carrying an operating DTR device. Always a
// subset of the candidate set S_L handed to the optimizer.
using DtrSet = std::set<int>;

// H-factor of one line over one chain: the probability the line does exactly
// what the chain records, evaluated generation by generation. A line that
// never fails contributes prod_i (1 - phi(FG_i)); a line first failing in
// generation d_e contributes phi(FG_{d_e}) * prod_{i<d_e} (1 - phi(FG_i)).
// phi(FG_1) is taken at the chain's base flows, phi(FG_i) for i >= 2 at the
// flows left by generation i-1. with_dtr evaluates phi at the improved
// capacity (alpha), otherwise at the static one.
double h_factor(const FailureChain& chain, const Network& net, int line_id,
                const RiskParams& params, bool with_dtr);

// Probability of the recorded chain when the lines in `dtr` run with DTR.
// Computed as a single sweep over generations (new failures contribute phi,
// surviving in-service lines contribute 1-phi, DTR lines use the improved
// phi'), deliberately not via h_factor so the two can cross-check each other.
double chain_probability(const FailureChain& chain, const Network& net, const DtrSet& dtr,
                         const RiskParams& params);

// Likelihood ratio fp_A / fp_B for the same chain under two DTR sets.
// Only lines in the symmetric difference contribute; equal sets give exactly
// 1.0. Throws NumericError when a denominator H-factor is zero (possible only
// when pr_max = 1 saturates phi to 1).
double sampling_weight(const FailureChain& chain, const Network& net, const DtrSet& set_a,
                       const DtrSet& set_b, const RiskParams& params);

// Expected extreme loss of one system state: mean over the state's chains of
// W_{dtr-0} * Y * [Y > y_ext]. With dtr empty every weight is exactly 1.
double state_risk(const std::vector<FailureChain>& chains, const Network& net,
                  const DtrSet& dtr, const RiskParams& params);

// Braess paradox indicator: summed per-chain risk increase (clamped at zero)
// when moving from DTR set `prev` to `next`. Nonnegative; zero when every
// chain's risk decreased.
double braess_indicator(const std::vector<FailureChain>& chains, const Network& net,
                        const DtrSet& prev, const DtrSet& next, const RiskParams& params);

// Per-state objective f_l(S_B) = RiskW_0 - RiskW_B + bpi_sign * eta * BPI(S_A -> S_B).
// `reference` is the previously accepted set during iterative construction
// and empty for stand-alone evaluation.
double subfunction_value(const std::vector<FailureChain>& chains, const Network& net,
                         const DtrSet& dtr, const DtrSet& reference, const RiskParams& params);

// Everything subfunction_value computes, kept per chain for inspection.
struct RiskBreakdown {
  std::vector<double> weight;        // W_{B-0} per chain, in chain order
  std::vector<double> contribution;  // weight * Y * [Y > y_ext] / |M| per chain
  double risk_w = 0.0;               // state risk under `dtr`
  double bpi = 0.0;                  // BPI(reference -> dtr)
  double value = 0.0;                // f_l
};

RiskBreakdown risk_breakdown(const std::vector<FailureChain>& chains, const Network& net,
                             const DtrSet& dtr, const DtrSet& reference,
                             const RiskParams& params);

// Precomputed per-chain reweighting terms for fast repeated evaluation of the
// per-state objectives over subsets of a fixed candidate set ("ground set").
// Subsets are 64-bit masks over positions in ground() (ascending line id).
//
// Construction reduces every stored chain to (Y, per-candidate H-ratio); a
// single f_i evaluation is then one product per exceeding chain. Evaluations
// with an empty reference set are memoized per (state, mask); all summations
// run in fixed chain order so results are bitwise reproducible regardless of
// call order or thread count.
class RiskOracle {
 public:
  // ground: candidate line ids (default: every line in the network).
  // Throws ConfigError on unknown/duplicate ids or |ground| > 64, and
  // NumericError if some chain has a zero H-factor denominator.
  RiskOracle(const ChainDatabase& db, const Network& net, const RiskParams& params,
             std::vector<int> ground = {});

  const std::vector<int>& ground() const { return ground_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  const RiskParams& params() const { return params_; }

  std::uint64_t mask_of(const DtrSet& lines) const;  // throws ConfigError off-ground
  DtrSet lines_of(std::uint64_t mask) const;

  double base_risk(int state) const;                      // RiskW with no DTR
  double state_risk(int state, std::uint64_t mask) const; // RiskW_B
  double bpi(int state, std::uint64_t mask_a, std::uint64_t mask_b) const;

  // f_l(mask_b) with reference mask_a; the mask_a = 0 case is the set
  // function used by the solvers and is memoized.
  double subfunction(int state, std::uint64_t mask_b, std::uint64_t mask_a = 0) const;

  // Closure over subfunction(state, mask, 0) for solver consumption. The
  // oracle must outlive the returned function.
  std::function<double(std::uint64_t)> subfunction_oracle(int state) const;

  // Mean of subfunction(i, masks[i]) over all states; masks.size() must be
  // num_states().
  double mean_value(const std::vector<std::uint64_t>& masks) const;

 private:
  struct ChainTerm {
    double y = 0.0;           // load loss, exceeds y_ext by construction
    std::vector<double> rho;  // H(phi') / H(phi) per ground position
  };
  struct StateTerms {
    std::vector<ChainTerm> exceeding;  // chains with Y > y_ext, in chain order
    std::size_t total = 0;             // |M^l| including non-exceeding chains
    double base = 0.0;                 // RiskW with no DTR
  };

  const StateTerms& check_state(int state) const;
  double chain_product(const ChainTerm& term, std::uint64_t mask) const;

  std::vector<int> ground_;
  RiskParams params_;
  std::vector<StateTerms> states_;
  mutable std::mutex memo_mutex_;
  mutable std::vector<std::unordered_map<std::uint64_t, double>> memo_;
};

}  // namespace tsso
