#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsso/cascade.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk_params.hpp"
#include "tsso/scg.hpp"

namespace tsso {

// Materialized experiment configuration (single JSON document). Every field
// has a default matching the shipped configuration; unknown keys are
// rejected so typos fail loudly.
struct ExperimentConfig {
  std::string network_path;
  std::string database_path;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = hardware concurrency (generation only)

  int state_count = 10;
  std::vector<double> load_scale;  // per-state scalar multipliers
  std::vector<double> gen_scale;   // defaults to load_scale
  std::vector<double> durations;   // defaults to equal shares
  double state_spread = 0.0;       // per-bus regional variation, in [0, 1)

  int chains_per_state = 2000;
  SimulationOptions sim;
  RiskParams risk;

  int k = 8;
  std::vector<int> k_c2;
  int p = 1;
  std::vector<int> candidates;  // ground line ids; empty = every line
  std::vector<int> s_l1_ids;    // explicit first block
  int s_l1_size = -1;           // or rule-based block size (top mean-|flow| lines)

  std::vector<std::string> strategies;  // compare list; empty = all
  std::vector<double> alpha_list{1.0, 1.03, 1.05, 1.07, 1.09, 1.11};
  std::vector<int> partition_sizes;     // default set against the ground size
  std::vector<double> load_ratio_list{1.0, 1.05, 1.1};
  std::vector<double> kappa_grid;       // default 0, 0.1, ..., 1
  std::vector<int> p_grid{1, 2, 3};

  int one_stage_k = 5;
  double dtr_lifetime_years = 6.0;
  std::vector<double> service_years{2.0, 4.0};
  int ls_pass_budget = 50;
  std::string guarantee_mode = "auto";  // auto | exact | estimated
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Broadcast the configured per-state scalars into full per-bus multiplier
// states for the given network. A positive states.spread additionally
// perturbs each bus load around its ladder level, deterministically in the
// config seed, so the states differ in pattern and not just magnitude.
std::vector<SystemState> make_states(const ExperimentConfig& config, const Network& net);

// Residual service life after `years` of operation: a line scheduled in
// states covering a `fraction` of the horizon retains 1 - years*fraction/
// lifetime of its DTR wear budget, clamped to [0, 1].
struct ServiceLifeRow {
  int line = 0;
  double years = 0.0;
  double fraction = 0.0;
  double residual = 0.0;
};

std::vector<ServiceLifeRow> service_life(const std::vector<int>& placement_ids,
                                         const std::vector<std::vector<int>>& schedule_ids,
                                         const std::vector<double>& durations,
                                         double lifetime_years,
                                         const std::vector<double>& years);

// Plan files round-trip through JSON so service-life can consume solver
// output across invocations.
struct LoadedPlan {
  std::string strategy;
  std::vector<int> placement;
  std::vector<std::vector<int>> schedules;  // line ids per state
};

LoadedPlan load_plan(const std::string& path);

// Commands behind the CLI verbs. All throw the project error types; cli_main
// maps them to exit codes (config 1, IO 2, numeric 3).
void cmd_generate(const ExperimentConfig& config);
void cmd_solve(const ExperimentConfig& config, const std::string& strategy);
void cmd_compare(const ExperimentConfig& config);
void cmd_sweep(const ExperimentConfig& config, const std::string& axis);
void cmd_service_life(const ExperimentConfig& config,
                      const std::vector<std::string>& plan_paths);

int cli_main(int argc, const char* const* argv);

}  // namespace tsso
