#include "tsso/risk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "tsso/errors.hpp"

namespace tsso {

void validate(const RiskParams& params) {
  if (!(params.pr_min >= 0.0 && params.pr_min < params.pr_max && params.pr_max <= 1.0))
    throw ConfigError("risk parameters need 0 <= pr_min < pr_max <= 1");
  if (!(params.mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(params.alpha >= 1.0)) throw ConfigError("alpha must be >= 1");
  if (!(params.y_ext >= 0.0)) throw ConfigError("y_ext must be nonnegative");
  if (!(params.eta > 0.0 && params.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  if (params.bpi_sign != 1 && params.bpi_sign != -1)
    throw ConfigError("bpi_sign must be +1 or -1");
}

double failure_probability(double flow_mw, const Line& line, const RiskParams& params,
                           bool with_dtr) {
  const double span = line.p_min + line.p_max;
  if (!(span > 0.0))
    throw ConfigError("degenerate line " + std::to_string(line.id) +
                      ": P_min + P_max must be positive");
  // alpha = 1.0 multiplies exactly, so the with_dtr and plain paths agree
  // bitwise when no improvement is configured.
  const double widened = (with_dtr ? params.alpha : 1.0) * span;
  const double arg = -params.mu * (2.0 * std::abs(flow_mw) - widened) / widened;
  return params.pr_min + (params.pr_max - params.pr_min) / (1.0 + std::exp(arg));
}

namespace {

void check_chain_shape(const FailureChain& chain, const Network& net) {
  if (chain.first_failure.size() != net.lines.size() ||
      chain.base_flow.size() != net.lines.size())
    throw ConfigError("chain does not match the network's line count");
}

}  // namespace

double h_factor(const FailureChain& chain, const Network& net, int line_id,
                const RiskParams& params, bool with_dtr) {
  check_chain_shape(chain, net);
  const std::size_t pos = net.line_pos(line_id);
  const Line& line = net.lines[pos];
  const int first = chain.first_failure[pos];
  const int last_survived = first == FailureChain::kNeverFails ? chain.depth() : first - 1;
  double h = 1.0;
  for (int i = 1; i <= last_survived; ++i)
    h *= 1.0 - failure_probability(chain.flows_before(i)[pos], line, params, with_dtr);
  if (first != FailureChain::kNeverFails)
    h *= failure_probability(chain.flows_before(first)[pos], line, params, with_dtr);
  return h;
}

double chain_probability(const FailureChain& chain, const Network& net, const DtrSet& dtr,
                         const RiskParams& params) {
  check_chain_shape(chain, net);
  std::vector<std::uint8_t> has_dtr(net.lines.size(), 0);
  for (int id : dtr) has_dtr[net.line_pos(id)] = 1;

  // Generation-major sweep, intentionally structured differently from
  // h_factor's line-major product so the two implementations check each
  // other: every in-service line rolls the dice each generation.
  std::vector<std::uint8_t> in_service(net.lines.size(), 1);
  std::vector<std::uint8_t> fails_now(net.lines.size(), 0);
  double fp = 1.0;
  for (int i = 1; i <= chain.depth(); ++i) {
    const std::vector<double>& flows = chain.flows_before(i);
    const GenerationRecord& rec = chain.records[i - 1];
    std::fill(fails_now.begin(), fails_now.end(), 0);
    for (int e : rec.failed_now) fails_now[e] = 1;
    for (std::size_t e = 0; e < net.lines.size(); ++e) {
      if (!in_service[e]) continue;
      const double phi =
          failure_probability(flows[e], net.lines[e], params, has_dtr[e] != 0);
      fp *= fails_now[e] ? phi : 1.0 - phi;
    }
    for (int e : rec.failed_now) in_service[e] = 0;
  }
  return fp;
}

namespace {

double h_ratio(const FailureChain& chain, const Network& net, int line_id,
               const RiskParams& params, bool dtr_in_numerator) {
  const double num = h_factor(chain, net, line_id, params, dtr_in_numerator);
  const double den = h_factor(chain, net, line_id, params, !dtr_in_numerator);
  if (den == 0.0)
    throw NumericError("zero H-factor denominator for line " + std::to_string(line_id) +
                       " in chain " + std::to_string(chain.id) + " of state " +
                       std::to_string(chain.state) +
                       "; a saturating pr_max = 1 is the only way here");
  return num / den;
}

}  // namespace

double sampling_weight(const FailureChain& chain, const Network& net, const DtrSet& set_a,
                       const DtrSet& set_b, const RiskParams& params) {
  double w = 1.0;
  for (int e : set_a)
    if (!set_b.count(e)) w *= h_ratio(chain, net, e, params, /*dtr_in_numerator=*/true);
  for (int e : set_b)
    if (!set_a.count(e)) w *= h_ratio(chain, net, e, params, /*dtr_in_numerator=*/false);
  return w;
}

double state_risk(const std::vector<FailureChain>& chains, const Network& net,
                  const DtrSet& dtr, const RiskParams& params) {
  if (chains.empty()) throw ConfigError("state risk needs at least one chain");
  const DtrSet none;
  double sum = 0.0;
  for (const FailureChain& chain : chains) {
    if (!(chain.load_loss > params.y_ext)) continue;
    const double w = dtr.empty() ? 1.0 : sampling_weight(chain, net, dtr, none, params);
    sum += w * chain.load_loss;
  }
  return sum / static_cast<double>(chains.size());
}

double braess_indicator(const std::vector<FailureChain>& chains, const Network& net,
                        const DtrSet& prev, const DtrSet& next, const RiskParams& params) {
  if (chains.empty()) throw ConfigError("BPI needs at least one chain");
  if (prev == next) return 0.0;
  const DtrSet none;
  double sum = 0.0;
  for (const FailureChain& chain : chains) {
    if (!(chain.load_loss > params.y_ext)) continue;
    const double wa = prev.empty() ? 1.0 : sampling_weight(chain, net, prev, none, params);
    const double wb = next.empty() ? 1.0 : sampling_weight(chain, net, next, none, params);
    sum += std::max((wb - wa) * chain.load_loss, 0.0);
  }
  return sum / static_cast<double>(chains.size());
}

double subfunction_value(const std::vector<FailureChain>& chains, const Network& net,
                         const DtrSet& dtr, const DtrSet& reference,
                         const RiskParams& params) {
  const DtrSet none;
  const double base = state_risk(chains, net, none, params);
  const double mitigated = state_risk(chains, net, dtr, params);
  const double paradox = braess_indicator(chains, net, reference, dtr, params);
  return base - mitigated + params.bpi_sign * params.eta * paradox;
}

RiskBreakdown risk_breakdown(const std::vector<FailureChain>& chains, const Network& net,
                             const DtrSet& dtr, const DtrSet& reference,
                             const RiskParams& params) {
  if (chains.empty()) throw ConfigError("risk breakdown needs at least one chain");
  const DtrSet none;
  RiskBreakdown out;
  out.weight.reserve(chains.size());
  out.contribution.reserve(chains.size());
  const double inv = 1.0 / static_cast<double>(chains.size());
  for (const FailureChain& chain : chains) {
    const double w = dtr.empty() ? 1.0 : sampling_weight(chain, net, dtr, none, params);
    out.weight.push_back(w);
    out.contribution.push_back(chain.load_loss > params.y_ext ? w * chain.load_loss * inv
                                                              : 0.0);
  }
  out.risk_w = state_risk(chains, net, dtr, params);
  out.bpi = braess_indicator(chains, net, reference, dtr, params);
  out.value = state_risk(chains, net, none, params) - out.risk_w +
              params.bpi_sign * params.eta * out.bpi;
  return out;
}

RiskOracle::RiskOracle(const ChainDatabase& db, const Network& net, const RiskParams& params,
                       std::vector<int> ground)
    : params_(params) {
  validate(params_);
  if (static_cast<int>(net.lines.size()) != db.n_lines)
    throw ConfigError("chain database line count does not match the network");
  if (ground.empty()) ground = net.line_ids();
  std::sort(ground.begin(), ground.end());
  if (std::adjacent_find(ground.begin(), ground.end()) != ground.end())
    throw ConfigError("duplicate line id in the candidate set");
  if (ground.size() > 64) throw ConfigError("candidate set exceeds 64 lines");
  for (int id : ground) net.line_pos(id);
  ground_ = std::move(ground);

  states_.resize(db.states.size());
  memo_.resize(db.states.size());
  for (std::size_t l = 0; l < db.states.size(); ++l) {
    StateTerms& st = states_[l];
    st.total = db.states[l].size();
    if (st.total == 0)
      throw ConfigError("state " + std::to_string(l) + " has no chains");
    double base = 0.0;
    for (const FailureChain& chain : db.states[l]) {
      if (!(chain.load_loss > params_.y_ext)) continue;
      ChainTerm term;
      term.y = chain.load_loss;
      term.rho.resize(ground_.size());
      for (std::size_t g = 0; g < ground_.size(); ++g)
        term.rho[g] = h_ratio(chain, net, ground_[g], params_, /*dtr_in_numerator=*/true);
      base += term.y;
      st.exceeding.push_back(std::move(term));
    }
    st.base = base / static_cast<double>(st.total);
  }
}

const RiskOracle::StateTerms& RiskOracle::check_state(int state) const {
  if (state < 0 || state >= num_states())
    throw ConfigError("state index " + std::to_string(state) + " out of range");
  return states_[static_cast<std::size_t>(state)];
}

std::uint64_t RiskOracle::mask_of(const DtrSet& lines) const {
  std::uint64_t mask = 0;
  for (int id : lines) {
    const auto it = std::lower_bound(ground_.begin(), ground_.end(), id);
    if (it == ground_.end() || *it != id)
      throw ConfigError("line " + std::to_string(id) + " is not in the candidate set");
    mask |= std::uint64_t{1} << (it - ground_.begin());
  }
  return mask;
}

DtrSet RiskOracle::lines_of(std::uint64_t mask) const {
  DtrSet out;
  while (mask) {
    out.insert(ground_[static_cast<std::size_t>(std::countr_zero(mask))]);
    mask &= mask - 1;
  }
  return out;
}

double RiskOracle::chain_product(const ChainTerm& term, std::uint64_t mask) const {
  double prod = 1.0;
  while (mask) {
    prod *= term.rho[static_cast<std::size_t>(std::countr_zero(mask))];
    mask &= mask - 1;
  }
  return prod;
}

double RiskOracle::base_risk(int state) const { return check_state(state).base; }

double RiskOracle::state_risk(int state, std::uint64_t mask) const {
  const StateTerms& st = check_state(state);
  double sum = 0.0;
  for (const ChainTerm& term : st.exceeding) sum += chain_product(term, mask) * term.y;
  return sum / static_cast<double>(st.total);
}

double RiskOracle::bpi(int state, std::uint64_t mask_a, std::uint64_t mask_b) const {
  const StateTerms& st = check_state(state);
  if (mask_a == mask_b) return 0.0;
  double sum = 0.0;
  for (const ChainTerm& term : st.exceeding) {
    const double pa = chain_product(term, mask_a);
    const double pb = chain_product(term, mask_b);
    sum += std::max((pb - pa) * term.y, 0.0);
  }
  return sum / static_cast<double>(st.total);
}

double RiskOracle::subfunction(int state, std::uint64_t mask_b, std::uint64_t mask_a) const {
  const StateTerms& st = check_state(state);
  const bool memoable = mask_a == 0;
  if (memoable) {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    const auto& memo = memo_[static_cast<std::size_t>(state)];
    if (const auto it = memo.find(mask_b); it != memo.end()) return it->second;
  }
  const double mitigated = state_risk(state, mask_b);
  const double paradox = bpi(state, mask_a, mask_b);
  const double value = st.base - mitigated + params_.bpi_sign * params_.eta * paradox;
  if (memoable) {
    // Concurrent fills of the same key compute bitwise-identical values
    // (fixed chain-order sums), so losing the emplace race is harmless.
    std::lock_guard<std::mutex> lock(memo_mutex_);
    memo_[static_cast<std::size_t>(state)].emplace(mask_b, value);
  }
  return value;
}

std::function<double(std::uint64_t)> RiskOracle::subfunction_oracle(int state) const {
  check_state(state);
  return [this, state](std::uint64_t mask) { return subfunction(state, mask, 0); };
}

double RiskOracle::mean_value(const std::vector<std::uint64_t>& masks) const {
  if (masks.size() != states_.size())
    throw ConfigError("schedule count does not match the number of states");
  double sum = 0.0;
  for (std::size_t l = 0; l < masks.size(); ++l)
    sum += subfunction(static_cast<int>(l), masks[l], 0);
  return sum / static_cast<double>(masks.size());
}

}  // namespace tsso
