#include "tsso/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tsso/baselines.hpp"
#include "tsso/errors.hpp"
#include "tsso/log.hpp"
#include "tsso/risk.hpp"
#include "tsso/rng.hpp"

namespace tsso {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& origin, const std::string& scope) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      fail(origin, "unknown key \"" + item.key() + "\" in " + scope);
    }
  }
}

int get_int(const json& obj, const char* key, int fallback, const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(origin, std::string(key) + " must be an integer");
  return v.get<int>();
}

double get_double(const json& obj, const char* key, double fallback,
                  const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(origin, std::string(key) + " must be a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(origin, std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_double_list(const json& obj, const char* key,
                                    const std::string& origin) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(origin, std::string(key) + " must be an array of numbers");
  for (const json& e : v) {
    if (!e.is_number()) fail(origin, std::string(key) + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_int_list(const json& obj, const char* key, const std::string& origin) {
  std::vector<int> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(origin, std::string(key) + " must be an array of integers");
  for (const json& e : v) {
    if (!e.is_number_integer()) {
      fail(origin, std::string(key) + " must contain only integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) fail(origin, "top level must be a JSON object");

  require_keys(doc,
               {"network", "database", "out_dir", "seed", "threads", "states",
                "chains_per_state", "d_max", "initiation", "risk", "constraints",
                "candidates", "s_l1", "s_l1_size", "strategies", "alpha_list",
                "partition_sizes", "load_ratio_list", "kappa_grid", "p_grid",
                "one_stage_k", "dtr_lifetime_years", "service_years",
                "ls_pass_budget", "guarantee_mode"},
               origin, "the configuration");

  ExperimentConfig cfg;
  cfg.network_path = get_string(doc, "network", "", origin);
  if (cfg.network_path.empty()) fail(origin, "\"network\" is required");
  cfg.database_path = get_string(doc, "database", "", origin);
  cfg.out_dir = get_string(doc, "out_dir", cfg.out_dir, origin);

  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      fail(origin, "seed must be a non-negative integer");
    }
    if (v.is_number_integer() && v.get<long long>() < 0) {
      fail(origin, "seed must be a non-negative integer");
    }
    cfg.seed = v.get<std::uint64_t>();
  }
  cfg.threads = get_int(doc, "threads", cfg.threads, origin);
  if (cfg.threads < 0) fail(origin, "threads must be >= 0");

  if (doc.contains("states")) {
    const json& st = doc.at("states");
    if (!st.is_object()) fail(origin, "states must be an object");
    require_keys(st, {"count", "load_scale", "gen_scale", "durations", "spread"},
                 origin, "states");
    cfg.state_count = get_int(st, "count", cfg.state_count, origin);
    cfg.load_scale = get_double_list(st, "load_scale", origin);
    cfg.gen_scale = get_double_list(st, "gen_scale", origin);
    cfg.durations = get_double_list(st, "durations", origin);
    cfg.state_spread = get_double(st, "spread", cfg.state_spread, origin);
    if (!(cfg.state_spread >= 0.0 && cfg.state_spread < 1.0)) {
      fail(origin, "states.spread must lie in [0, 1)");
    }
  }
  if (cfg.state_count < 1) fail(origin, "states.count must be >= 1");
  const std::size_t m = static_cast<std::size_t>(cfg.state_count);
  if (cfg.load_scale.empty()) {
    // Even ladder from light to heavy loading so the cascade statistics
    // differ across states.
    cfg.load_scale.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
      cfg.load_scale[l] =
          m == 1 ? 1.0 : 0.9 + 0.25 * static_cast<double>(l) / static_cast<double>(m - 1);
    }
  }
  if (cfg.load_scale.size() != m) {
    fail(origin, "states.load_scale must list one multiplier per state");
  }
  if (cfg.gen_scale.empty()) cfg.gen_scale = cfg.load_scale;
  if (cfg.gen_scale.size() != m) {
    fail(origin, "states.gen_scale must list one multiplier per state");
  }
  for (double v : cfg.load_scale) {
    if (!(v > 0.0)) fail(origin, "states.load_scale entries must be positive");
  }
  for (double v : cfg.gen_scale) {
    if (!(v > 0.0)) fail(origin, "states.gen_scale entries must be positive");
  }
  if (cfg.durations.empty()) {
    cfg.durations.assign(m, 1.0 / static_cast<double>(m));
  }
  if (cfg.durations.size() != m) {
    fail(origin, "states.durations must list one weight per state");
  }
  for (double v : cfg.durations) {
    if (!(v > 0.0)) fail(origin, "states.durations entries must be positive");
  }

  cfg.chains_per_state = get_int(doc, "chains_per_state", cfg.chains_per_state, origin);
  if (cfg.chains_per_state < 1) fail(origin, "chains_per_state must be >= 1");
  cfg.sim.d_max = get_int(doc, "d_max", cfg.sim.d_max, origin);
  if (cfg.sim.d_max < 1) fail(origin, "d_max must be >= 1");
  const std::string initiation = get_string(doc, "initiation", "sampled", origin);
  if (initiation == "sampled") {
    cfg.sim.initiation = Initiation::Sampled;
  } else if (initiation == "exhaustive") {
    cfg.sim.initiation = Initiation::Exhaustive;
  } else {
    fail(origin, "initiation must be \"sampled\" or \"exhaustive\"");
  }

  if (doc.contains("risk")) {
    const json& rk = doc.at("risk");
    if (!rk.is_object()) fail(origin, "risk must be an object");
    require_keys(rk, {"pr_min", "pr_max", "mu", "alpha", "y_ext", "eta", "bpi_sign"},
                 origin, "risk");
    cfg.risk.pr_min = get_double(rk, "pr_min", cfg.risk.pr_min, origin);
    cfg.risk.pr_max = get_double(rk, "pr_max", cfg.risk.pr_max, origin);
    cfg.risk.mu = get_double(rk, "mu", cfg.risk.mu, origin);
    cfg.risk.alpha = get_double(rk, "alpha", cfg.risk.alpha, origin);
    cfg.risk.y_ext = get_double(rk, "y_ext", cfg.risk.y_ext, origin);
    cfg.risk.eta = get_double(rk, "eta", cfg.risk.eta, origin);
    cfg.risk.bpi_sign = get_int(rk, "bpi_sign", cfg.risk.bpi_sign, origin);
  }
  if (cfg.risk.pr_max >= 1.0) {
    log_warn("config: pr_max >= 1 saturates failure probabilities; capping at 1 - 1e-9");
    cfg.risk.pr_max = 1.0 - 1e-9;
  }
  validate(cfg.risk);

  if (doc.contains("constraints")) {
    const json& cn = doc.at("constraints");
    if (!cn.is_object()) fail(origin, "constraints must be an object");
    require_keys(cn, {"k", "k_c2", "p"}, origin, "constraints");
    cfg.k = get_int(cn, "k", cfg.k, origin);
    if (cn.contains("k_c2")) {
      const json& kc = cn.at("k_c2");
      if (kc.is_number_integer()) {
        cfg.k_c2.assign(m, kc.get<int>());
      } else {
        cfg.k_c2 = get_int_list(cn, "k_c2", origin);
      }
    }
    cfg.p = get_int(cn, "p", cfg.p, origin);
  }
  if (cfg.k < 1) fail(origin, "constraints.k must be >= 1");
  if (cfg.k_c2.empty()) {
    if (m == 10) {
      cfg.k_c2 = {3, 4, 4, 3, 3, 3, 3, 4, 3, 3};
      for (int& v : cfg.k_c2) v = std::min(v, cfg.k);
    } else {
      cfg.k_c2.assign(m, std::min(3, cfg.k));
    }
  }
  if (cfg.k_c2.size() != m) {
    fail(origin, "constraints.k_c2 must list one budget per state");
  }
  for (int v : cfg.k_c2) {
    if (v < 1 || v > cfg.k) {
      fail(origin, "constraints.k_c2 entries must lie in [1, k]");
    }
  }
  if (cfg.p < 1 || cfg.p > cfg.k) fail(origin, "constraints.p must lie in [1, k]");

  cfg.candidates = get_int_list(doc, "candidates", origin);
  cfg.s_l1_ids = get_int_list(doc, "s_l1", origin);
  cfg.s_l1_size = get_int(doc, "s_l1_size", cfg.s_l1_size, origin);
  if (!cfg.s_l1_ids.empty() && cfg.s_l1_size >= 0) {
    fail(origin, "give either s_l1 or s_l1_size, not both");
  }
  if (doc.contains("s_l1_size") && cfg.s_l1_size < 1) {
    fail(origin, "s_l1_size must be >= 1");
  }

  if (doc.contains("strategies")) {
    const json& v = doc.at("strategies");
    if (!v.is_array()) fail(origin, "strategies must be an array of strings");
    for (const json& e : v) {
      if (!e.is_string()) fail(origin, "strategies must contain only strings");
      const std::string name = e.get<std::string>();
      strategy_from_string(name);  // throws ConfigError for unknown names
      cfg.strategies.push_back(name);
    }
    if (cfg.strategies.empty()) fail(origin, "strategies must not be empty");
  }

  if (doc.contains("alpha_list")) cfg.alpha_list = get_double_list(doc, "alpha_list", origin);
  if (cfg.alpha_list.empty()) fail(origin, "alpha_list must not be empty");
  for (double a : cfg.alpha_list) {
    if (!(a >= 1.0)) fail(origin, "alpha_list entries must be >= 1");
  }

  cfg.partition_sizes = get_int_list(doc, "partition_sizes", origin);
  for (int s : cfg.partition_sizes) {
    if (s < 1) fail(origin, "partition_sizes entries must be >= 1");
  }

  if (doc.contains("load_ratio_list")) {
    cfg.load_ratio_list = get_double_list(doc, "load_ratio_list", origin);
  }
  if (cfg.load_ratio_list.empty()) fail(origin, "load_ratio_list must not be empty");
  for (double r : cfg.load_ratio_list) {
    if (!(r > 0.0)) fail(origin, "load_ratio_list entries must be positive");
  }

  if (doc.contains("kappa_grid")) {
    cfg.kappa_grid = get_double_list(doc, "kappa_grid", origin);
  } else {
    for (int i = 0; i <= 10; ++i) cfg.kappa_grid.push_back(static_cast<double>(i) / 10.0);
  }
  if (cfg.kappa_grid.empty()) fail(origin, "kappa_grid must not be empty");
  for (double kv : cfg.kappa_grid) {
    if (!(kv >= 0.0 && kv <= 1.0)) fail(origin, "kappa_grid entries must lie in [0, 1]");
  }

  if (doc.contains("p_grid")) cfg.p_grid = get_int_list(doc, "p_grid", origin);
  if (cfg.p_grid.empty()) fail(origin, "p_grid must not be empty");
  for (int pv : cfg.p_grid) {
    if (pv < 1) fail(origin, "p_grid entries must be >= 1");
  }

  cfg.one_stage_k = get_int(doc, "one_stage_k", cfg.one_stage_k, origin);
  if (cfg.one_stage_k < 1) fail(origin, "one_stage_k must be >= 1");
  cfg.dtr_lifetime_years = get_double(doc, "dtr_lifetime_years", cfg.dtr_lifetime_years, origin);
  if (!(cfg.dtr_lifetime_years > 0.0)) fail(origin, "dtr_lifetime_years must be positive");
  if (doc.contains("service_years")) {
    cfg.service_years = get_double_list(doc, "service_years", origin);
  }
  if (cfg.service_years.empty()) fail(origin, "service_years must not be empty");
  for (double y : cfg.service_years) {
    if (!(y >= 0.0)) fail(origin, "service_years entries must be >= 0");
  }
  cfg.ls_pass_budget = get_int(doc, "ls_pass_budget", cfg.ls_pass_budget, origin);
  if (cfg.ls_pass_budget < 1) fail(origin, "ls_pass_budget must be >= 1");
  cfg.guarantee_mode = get_string(doc, "guarantee_mode", cfg.guarantee_mode, origin);
  if (cfg.guarantee_mode != "auto" && cfg.guarantee_mode != "exact" &&
      cfg.guarantee_mode != "estimated") {
    fail(origin, "guarantee_mode must be \"auto\", \"exact\" or \"estimated\"");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading config file " + path);
  return parse_config_text(buffer.str(), path);
}

std::vector<SystemState> make_states(const ExperimentConfig& config, const Network& net) {
  std::vector<SystemState> states;
  states.reserve(static_cast<std::size_t>(config.state_count));
  for (int l = 0; l < config.state_count; ++l) {
    SystemState st;
    st.index = l;
    st.load_mult.assign(net.buses.size(), config.load_scale[static_cast<std::size_t>(l)]);
    st.gen_mult.assign(net.buses.size(), config.gen_scale[static_cast<std::size_t>(l)]);
    if (config.state_spread > 0.0) {
      // Regional demand variation: each state perturbs bus loads around its
      // ladder level so different lines bind in different states. Keyed by
      // the config seed and the state index only, never by sampling order.
      SplitMix64 rng(mix_key(config.seed, 0x57A7E5u, static_cast<std::uint64_t>(l)));
      for (double& v : st.load_mult) {
        v *= 1.0 + config.state_spread * (2.0 * rng.uniform() - 1.0);
      }
    }
    st.duration = config.durations[static_cast<std::size_t>(l)];
    states.push_back(std::move(st));
  }
  return states;
}

std::vector<ServiceLifeRow> service_life(const std::vector<int>& placement_ids,
                                         const std::vector<std::vector<int>>& schedule_ids,
                                         const std::vector<double>& durations,
                                         double lifetime_years,
                                         const std::vector<double>& years) {
  if (schedule_ids.size() != durations.size()) {
    throw ConfigError("service_life: schedules and durations disagree on the state count");
  }
  if (!(lifetime_years > 0.0)) {
    throw ConfigError("service_life: lifetime must be positive");
  }
  double total = 0.0;
  for (double d : durations) {
    if (!(d > 0.0)) throw ConfigError("service_life: durations must be positive");
    total += d;
  }
  std::vector<int> lines = placement_ids;
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());

  std::vector<ServiceLifeRow> rows;
  for (int line : lines) {
    double active = 0.0;
    for (std::size_t l = 0; l < schedule_ids.size(); ++l) {
      const auto& sched = schedule_ids[l];
      if (std::find(sched.begin(), sched.end(), line) != sched.end()) {
        active += durations[l];
      }
    }
    const double fraction = active / total;
    for (double y : years) {
      ServiceLifeRow row;
      row.line = line;
      row.years = y;
      row.fraction = fraction;
      row.residual = std::clamp(1.0 - y * fraction / lifetime_years, 0.0, 1.0);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace tsso
