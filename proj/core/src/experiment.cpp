#include "tsso/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tsso/baselines.hpp"
#include "tsso/errors.hpp"
#include "tsso/log.hpp"
#include "tsso/risk.hpp"
#include "tsso/submodular.hpp"

namespace tsso {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string database_path(const ExperimentConfig& config) {
  return config.database_path.empty() ? config.out_dir + "/chains.bin"
                                      : config.database_path;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);  // binary keeps \n on every platform
  if (!out) throw IoError("cannot open output file " + path);
  return out;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out = open_output(path);
  out << header << "\n";
  for (const std::string& row : rows) out << row << "\n";
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

int resolve_threads(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<int> ground_ids(const ExperimentConfig& config, const Network& net) {
  if (config.candidates.empty()) return net.line_ids();
  std::vector<int> ids = config.candidates;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("candidates contains a duplicate line id");
  }
  return ids;
}

// Candidate ids ranked by duration-weighted mean pre-event |flow|, heaviest
// first, ties broken toward the smaller id. This is the default rule for
// carving the first partition block out of the ground set.
std::vector<int> rank_by_mean_flow(const Network& net, const std::vector<SystemState>& states,
                                   const std::vector<int>& ids) {
  std::vector<double> score(ids.size(), 0.0);
  for (const SystemState& state : states) {
    const Network applied = apply_state(net, state);
    const FlowSolution sol = dc_power_flow(applied);
    for (std::size_t g = 0; g < ids.size(); ++g) {
      const int pos = net.line_pos(ids[g]);
      score[g] += state.duration * std::abs(sol.flow[static_cast<std::size_t>(pos)]);
    }
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return ids[a] < ids[b];
  });
  std::vector<int> ranked(ids.size());
  for (std::size_t g = 0; g < order.size(); ++g) ranked[g] = ids[order[g]];
  return ranked;
}

std::uint64_t block_mask(const TssoProblem& problem, const std::vector<int>& ranked,
                         int size) {
  std::vector<int> take(ranked.begin(), ranked.begin() + size);
  return problem.mask_of(take);
}

// Everything the solver-facing commands share: the network, the applied
// states, the sampled chains, the risk oracle and the assembled problem.
struct Workbench {
  Network net;
  std::vector<SystemState> states;
  ChainDatabase db;
  std::unique_ptr<RiskOracle> oracle;
  TssoProblem problem;
};

TssoProblem assemble_problem(const ExperimentConfig& config, const Network& net,
                             const std::vector<SystemState>& states,
                             const RiskOracle& oracle) {
  TssoProblem problem;
  problem.ground = oracle.ground();
  problem.k = config.k;
  problem.k_c2 = config.k_c2;
  problem.p = config.p;
  problem.sub_fns.reserve(static_cast<std::size_t>(oracle.num_states()));
  for (int i = 0; i < oracle.num_states(); ++i) {
    problem.sub_fns.push_back(oracle.subfunction_oracle(i));
  }
  if (!config.s_l1_ids.empty()) {
    problem.s_l1 = problem.mask_of(config.s_l1_ids);
  } else {
    const int n = problem.num_ground();
    int size = config.s_l1_size >= 1 ? config.s_l1_size : (n + 1) / 2;
    if (size > n) throw ConfigError("s_l1_size exceeds the ground set size");
    problem.s_l1 = block_mask(problem, rank_by_mean_flow(net, states, problem.ground), size);
  }
  problem.validate();
  return problem;
}

Workbench make_workbench(const ExperimentConfig& config) {
  Workbench wb;
  wb.net = parse_network(config.network_path);
  wb.states = make_states(config, wb.net);
  const std::uint64_t params_fp = sampling_fingerprint(config.risk, config.sim);
  DatabaseLoad loaded = load_database(database_path(config), &wb.net, &params_fp);
  for (const std::string& warning : loaded.warnings) log_warn(warning);
  wb.db = std::move(loaded.db);
  if (wb.db.states.size() != static_cast<std::size_t>(config.state_count)) {
    throw ConfigError("chain database holds " + std::to_string(wb.db.states.size()) +
                      " states but the configuration defines " +
                      std::to_string(config.state_count) + "; regenerate it");
  }
  wb.oracle = std::make_unique<RiskOracle>(wb.db, wb.net, config.risk,
                                           ground_ids(config, wb.net));
  wb.problem = assemble_problem(config, wb.net, wb.states, *wb.oracle);
  return wb;
}

StrategyInputs strategy_inputs(const ExperimentConfig& config, const Workbench& wb) {
  StrategyInputs inputs;
  inputs.network = &wb.net;
  inputs.states = &wb.states;
  inputs.db = &wb.db;
  inputs.params = &config.risk;
  inputs.ls_pass_budget = config.ls_pass_budget;
  return inputs;
}

// Single-stage reference model: one greedy placement operated identically in
// every state, so the second-stage budgets never bind.
DtrPlan solve_one_stage(const TssoProblem& problem, int one_stage_k) {
  const int m = problem.num_states();
  const SetFn mean_f = [&problem, m](std::uint64_t mask) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += problem.sub_fns[static_cast<std::size_t>(i)](mask);
    return sum / static_cast<double>(m);
  };
  const InnerSolution sol = greedy_inner(mean_f, problem.ground_mask(),
                                         std::min(one_stage_k, problem.num_ground()));
  DtrPlan plan;
  plan.strategy = "ONE";
  plan.placement = sol.mask;
  plan.schedules.assign(static_cast<std::size_t>(m), sol.mask);
  plan.value = sol.value;
  plan.stopped_early = std::popcount(sol.mask) < std::min(one_stage_k, problem.num_ground());
  return plan;
}

// What a placement is actually worth: exact second-stage schedules per state
// plus the accompanying interaction indicator.
struct PlanEval {
  std::vector<std::uint64_t> schedules;
  std::vector<double> f;
  std::vector<double> bpi;
  double value = 0.0;
  double bpi_mean = 0.0;
};

PlanEval evaluate_placement(const TssoProblem& problem, const RiskOracle& oracle,
                            std::uint64_t placement, int extra_budget = 0) {
  const int m = problem.num_states();
  PlanEval eval;
  eval.schedules.resize(static_cast<std::size_t>(m));
  eval.f.resize(static_cast<std::size_t>(m));
  eval.bpi.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const int budget =
        std::min(problem.k_c2[si] + extra_budget, std::popcount(placement));
    const InnerSolution sol = brute_force_inner(problem.sub_fns[si], placement, budget);
    eval.schedules[si] = sol.mask;
    eval.f[si] = sol.value;
    eval.bpi[si] = oracle.bpi(i, 0, sol.mask);
    eval.value += sol.value;
    eval.bpi_mean += eval.bpi[si];
  }
  eval.value /= static_cast<double>(m);
  eval.bpi_mean /= static_cast<double>(m);
  return eval;
}

PlanEval evaluate_fixed(const TssoProblem& problem, const RiskOracle& oracle,
                        const std::vector<std::uint64_t>& schedules) {
  const int m = problem.num_states();
  PlanEval eval;
  eval.schedules = schedules;
  eval.f.resize(static_cast<std::size_t>(m));
  eval.bpi.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    eval.f[si] = problem.sub_fns[si](schedules[si]);
    eval.bpi[si] = oracle.bpi(i, 0, schedules[si]);
    eval.value += eval.f[si];
    eval.bpi_mean += eval.bpi[si];
  }
  eval.value /= static_cast<double>(m);
  eval.bpi_mean /= static_cast<double>(m);
  return eval;
}

void write_plan_file(const std::string& path, const DtrPlan& plan,
                     const TssoProblem& problem, const RiskOracle& oracle) {
  json doc;
  doc["strategy"] = plan.strategy;
  doc["value"] = plan.value;
  doc["stopped_early"] = plan.stopped_early;
  doc["budget_hit"] = plan.budget_hit;
  doc["placement"] = problem.ids_of(plan.placement);
  json schedules = json::array();
  json per_state = json::array();
  for (std::size_t i = 0; i < plan.schedules.size(); ++i) {
    schedules.push_back(problem.ids_of(plan.schedules[i]));
    json st;
    st["f"] = problem.sub_fns[i](plan.schedules[i]);
    st["bpi"] = oracle.bpi(static_cast<int>(i), 0, plan.schedules[i]);
    st["risk_w"] = oracle.state_risk(static_cast<int>(i), plan.schedules[i]);
    per_state.push_back(std::move(st));
  }
  doc["schedules"] = std::move(schedules);
  doc["per_state"] = std::move(per_state);
  json trace = json::array();
  for (const IterationTrace& it : plan.trace) {
    json row;
    row["chosen"] = it.chosen >= 0 ? problem.ground[static_cast<std::size_t>(it.chosen)] : -1;
    row["gain"] = it.gain_sum;
    row["phi"] = it.phi;
    row["residual"] = it.identity_residual;
    json actions = json::array();
    for (int a : it.action) {
      // -2 unchanged, -1 plain add, otherwise the replaced line's id
      actions.push_back(a >= 0 ? problem.ground[static_cast<std::size_t>(a)] : a);
    }
    row["action"] = std::move(actions);
    trace.push_back(std::move(row));
  }
  doc["trace"] = std::move(trace);

  std::ofstream out = open_output(path);
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

bool exact_guarantee_mode(const ExperimentConfig& config, const TssoProblem& problem) {
  if (config.guarantee_mode == "exact") return true;
  if (config.guarantee_mode == "estimated") return false;
  return tsso_enumeration_feasible(problem);
}

std::string guarantee_row(double value, const GuaranteeReport& report) {
  std::ostringstream row;
  row << fmt_num(value) << ',' << fmt_num(report.kappa_f1) << ',' << fmt_num(report.pure)
      << ',' << fmt_num(report.o_combined) << ',' << fmt_num(report.certified);
  return row.str();
}

constexpr const char* kGuaranteeHeader = "F,kappa_f1,pure_guarantee,o_error,guarantee";

}  // namespace

void cmd_generate(const ExperimentConfig& config) {
  const Network net = parse_network(config.network_path);
  const std::vector<SystemState> states = make_states(config, net);
  const ChainDatabase db =
      build_database(net, states, config.chains_per_state, config.risk, config.seed,
                     config.sim, resolve_threads(config));
  const std::string path = database_path(config);
  ensure_parent_dir(path);
  persist_database(db, path);

  std::vector<std::string> rows;
  std::size_t total = 0;
  for (std::size_t l = 0; l < db.states.size(); ++l) {
    const auto& chains = db.states[l];
    double mean_y = 0.0;
    double exceed = 0.0;
    for (const FailureChain& ch : chains) {
      mean_y += ch.load_loss;
      if (ch.load_loss > config.risk.y_ext) exceed += 1.0;
    }
    const double n = chains.empty() ? 1.0 : static_cast<double>(chains.size());
    mean_y /= n;
    exceed /= n;
    total += chains.size();
    std::ostringstream row;
    row << l << ',' << chains.size() << ',' << fmt_num(mean_y) << ',' << fmt_num(exceed);
    rows.push_back(row.str());
    std::cout << "state " << l << ": " << chains.size() << " chains, mean load loss "
              << fmt_num(mean_y) << " MW, fraction exceeding " << fmt_num(config.risk.y_ext)
              << " MW: " << fmt_num(exceed) << "\n";
  }
  write_csv(config.out_dir + "/generate_summary.csv", "state,chains,mean_y,frac_exceed",
            rows);
  std::cout << "wrote " << total << " chains to " << path << "\n";
}

void cmd_solve(const ExperimentConfig& config, const std::string& strategy) {
  Workbench wb = make_workbench(config);

  std::string lowered = strategy;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  DtrPlan plan;
  bool with_guarantee = true;
  if (lowered == "one-stage" || lowered == "one_stage" || lowered == "one") {
    plan = solve_one_stage(wb.problem, config.one_stage_k);
    with_guarantee = false;  // the second-stage budgets never bind here
  } else {
    const StrategyKind kind = strategy_from_string(strategy);
    plan = run_strategy(kind, wb.problem, strategy_inputs(config, wb), config.seed);
  }

  const std::string plan_path = config.out_dir + "/plan_" + plan.strategy + ".json";
  write_plan_file(plan_path, plan, wb.problem, *wb.oracle);
  std::cout << plan.strategy << " placed " << join_ids(wb.problem.ids_of(plan.placement))
            << " with objective " << fmt_num(plan.value) << "\n";

  if (with_guarantee) {
    const Decomposition decomp = modular_decomposition(wb.problem);
    const bool exact = exact_guarantee_mode(config, wb.problem);
    const GuaranteeReport report = guarantee_report(plan, wb.problem, decomp, exact);
    for (const std::string& note : report.notes) log_info("guarantee: " + note);
    write_csv(config.out_dir + "/guarantee_" + plan.strategy + ".csv", kGuaranteeHeader,
              {guarantee_row(plan.value, report)});
    std::cout << "certified guarantee factor " << fmt_num(report.certified) << " ("
              << (report.exact ? "exact" : "estimated") << " reference)\n";
  }
  std::cout << "wrote " << plan_path << "\n";
}

void cmd_compare(const ExperimentConfig& config) {
  Workbench wb = make_workbench(config);
  const StrategyInputs inputs = strategy_inputs(config, wb);

  std::vector<StrategyKind> kinds;
  if (config.strategies.empty()) {
    kinds = all_strategies();
  } else {
    for (const std::string& name : config.strategies) {
      kinds.push_back(strategy_from_string(name));
    }
  }

  std::vector<std::string> rows;
  PlanEval scg_eval;
  bool have_scg = false;
  for (StrategyKind kind : kinds) {
    const DtrPlan plan = run_strategy(kind, wb.problem, inputs, config.seed);
    const PlanEval eval = evaluate_placement(wb.problem, *wb.oracle, plan.placement);
    if (kind == StrategyKind::Scg) {
      scg_eval = eval;
      have_scg = true;
    }
    std::ostringstream row;
    row << strategy_name(kind) << ',' << fmt_num(eval.value) << ','
        << fmt_num(eval.bpi_mean);
    rows.push_back(row.str());
    std::cout << strategy_name(kind) << ": F = " << fmt_num(eval.value)
              << ", BPI = " << fmt_num(eval.bpi_mean) << "\n";
  }
  rows.push_back("No-DTR,0,0");
  std::cout << "No-DTR: F = 0, BPI = 0\n";
  write_csv(config.out_dir + "/comparison.csv", "strategy,F,BPI", rows);

  // Stage comparison: one static placement operated everywhere versus the
  // budgeted two-stage schedules over the surrogate-greedy placement.
  if (!have_scg) {
    const DtrPlan plan = run_strategy(StrategyKind::Scg, wb.problem, inputs, config.seed);
    scg_eval = evaluate_placement(wb.problem, *wb.oracle, plan.placement);
  }
  const DtrPlan one = solve_one_stage(wb.problem, config.one_stage_k);
  const PlanEval one_eval = evaluate_fixed(wb.problem, *wb.oracle, one.schedules);

  std::vector<std::string> stage_rows;
  const int m = wb.problem.num_states();
  for (int i = 0; i < m; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    std::ostringstream row;
    row << i << ',' << fmt_num(one_eval.f[si]) << ',' << fmt_num(one_eval.bpi[si]) << ','
        << join_ids(wb.problem.ids_of(one_eval.schedules[si])) << ','
        << fmt_num(scg_eval.f[si]) << ',' << fmt_num(scg_eval.bpi[si]) << ','
        << join_ids(wb.problem.ids_of(scg_eval.schedules[si]));
    stage_rows.push_back(row.str());
  }
  std::ostringstream mean_row;
  mean_row << "mean," << fmt_num(one_eval.value) << ',' << fmt_num(one_eval.bpi_mean)
           << ",," << fmt_num(scg_eval.value) << ',' << fmt_num(scg_eval.bpi_mean) << ',';
  stage_rows.push_back(mean_row.str());
  write_csv(config.out_dir + "/stage_compare.csv",
            "state,f_one,bpi_one,t_one,f_two,bpi_two,t_two", stage_rows);
  std::cout << "one-stage mean F = " << fmt_num(one_eval.value)
            << ", two-stage mean F = " << fmt_num(scg_eval.value) << "\n";
}

namespace {

void sweep_alpha(const ExperimentConfig& config) {
  const Network net = parse_network(config.network_path);
  const std::vector<SystemState> states = make_states(config, net);
  const std::uint64_t params_fp = sampling_fingerprint(config.risk, config.sim);
  DatabaseLoad loaded = load_database(database_path(config), &net, &params_fp);
  for (const std::string& warning : loaded.warnings) log_warn(warning);
  const ChainDatabase db = std::move(loaded.db);

  std::vector<std::string> rows;
  for (double alpha : config.alpha_list) {
    RiskParams params = config.risk;
    params.alpha = alpha;
    const RiskOracle oracle(db, net, params, ground_ids(config, net));
    const TssoProblem problem = assemble_problem(config, net, states, oracle);
    const Decomposition decomp = modular_decomposition(problem);
    const DtrPlan plan = solve_scg(problem, decomp);
    const PlanEval eval = evaluate_placement(problem, oracle, plan.placement);
    double risk_w = 0.0;
    for (int i = 0; i < problem.num_states(); ++i) {
      risk_w += oracle.state_risk(i, eval.schedules[static_cast<std::size_t>(i)]);
    }
    risk_w /= static_cast<double>(problem.num_states());
    std::ostringstream row;
    row << fmt_num(alpha) << ',' << fmt_num(eval.value) << ',' << fmt_num(risk_w) << ','
        << fmt_num(eval.bpi_mean);
    rows.push_back(row.str());
    std::cout << "alpha " << fmt_num(alpha) << ": F = " << fmt_num(eval.value)
              << ", RiskW = " << fmt_num(risk_w) << ", BPI = " << fmt_num(eval.bpi_mean)
              << "\n";
  }
  write_csv(config.out_dir + "/alpha.csv", "alpha,F,RiskW,BPI", rows);
}

void sweep_partition(const ExperimentConfig& config) {
  Workbench wb = make_workbench(config);
  const int n = wb.problem.num_ground();
  std::vector<int> sizes = config.partition_sizes;
  if (sizes.empty()) {
    sizes = {std::max(1, n / 4), std::max(1, (3 * n) / 4), n};
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  }
  const std::vector<int> ranked = rank_by_mean_flow(wb.net, wb.states, wb.problem.ground);

  std::vector<std::string> rows;
  for (int size : sizes) {
    if (size > n) throw ConfigError("partition size exceeds the ground set size");
    TssoProblem problem = wb.problem;
    problem.s_l1 = block_mask(problem, ranked, size);
    const Decomposition decomp = modular_decomposition(problem);
    const DtrPlan plan = solve_scg(problem, decomp);
    const bool exact = exact_guarantee_mode(config, problem);
    const GuaranteeReport report = guarantee_report(plan, problem, decomp, exact);
    for (const std::string& note : report.notes) {
      log_info("partition " + std::to_string(size) + ": " + note);
    }
    rows.push_back(std::to_string(size) + ',' + guarantee_row(plan.value, report));
    std::cout << "|S_L1| = " << size << ": F = " << fmt_num(plan.value)
              << ", certified = " << fmt_num(report.certified) << "\n";
  }
  write_csv(config.out_dir + "/partition.csv", std::string("s_l1_size,") + kGuaranteeHeader,
            rows);
}

void sweep_load(const ExperimentConfig& config) {
  const Network net = parse_network(config.network_path);
  const int threads = resolve_threads(config);

  std::vector<std::string> rows;
  for (double ratio : config.load_ratio_list) {
    ExperimentConfig scaled = config;
    for (double& v : scaled.load_scale) v *= ratio;
    for (double& v : scaled.gen_scale) v *= ratio;
    const std::vector<SystemState> states = make_states(scaled, net);
    const ChainDatabase db = build_database(net, states, config.chains_per_state,
                                            config.risk, config.seed, config.sim, threads);
    const RiskOracle oracle(db, net, config.risk, ground_ids(config, net));
    const TssoProblem problem = assemble_problem(scaled, net, states, oracle);

    const DtrPlan one = solve_one_stage(problem, config.one_stage_k);
    const PlanEval one_eval = evaluate_fixed(problem, oracle, one.schedules);

    const Decomposition decomp = modular_decomposition(problem);
    const DtrPlan two = solve_scg(problem, decomp);
    const PlanEval two_eval = evaluate_placement(problem, oracle, two.placement);

    // Flexible variant: same placement, one extra second-stage slot per state.
    const PlanEval flex_eval = evaluate_placement(problem, oracle, two.placement, 1);

    const auto emit = [&](const char* model, const PlanEval& eval) {
      std::ostringstream row;
      row << fmt_num(ratio) << ',' << model << ',' << fmt_num(eval.value) << ','
          << fmt_num(eval.bpi_mean);
      rows.push_back(row.str());
      std::cout << "load " << fmt_num(ratio) << ' ' << model << ": F = "
                << fmt_num(eval.value) << ", BPI = " << fmt_num(eval.bpi_mean) << "\n";
    };
    emit("one", one_eval);
    emit("two", two_eval);
    emit("flexible", flex_eval);
  }
  write_csv(config.out_dir + "/load.csv", "load_ratio,model,F,BPI", rows);
}

void sweep_surface(const ExperimentConfig& config) {
  const std::vector<GuaranteeRow> table = guarantee_table(config.kappa_grid, config.p_grid);
  std::vector<std::string> rows;
  for (const GuaranteeRow& r : table) {
    std::ostringstream row;
    row << fmt_num(r.kappa) << ',' << r.p << ',' << fmt_num(r.scg) << ',' << fmt_num(r.ls)
        << ',' << fmt_num(r.rg) << ',' << fmt_num(r.gpg) << ',' << fmt_num(r.gcg);
    rows.push_back(row.str());
  }
  write_csv(config.out_dir + "/surface.csv", "kappa,p,SCG,LS,RG,GPG,GCG", rows);
  std::cout << "wrote " << rows.size() << " guarantee surface rows\n";
}

}  // namespace

void cmd_sweep(const ExperimentConfig& config, const std::string& axis) {
  if (axis == "alpha") {
    sweep_alpha(config);
  } else if (axis == "partition") {
    sweep_partition(config);
  } else if (axis == "load") {
    sweep_load(config);
  } else if (axis == "guarantee-surface") {
    sweep_surface(config);
  } else {
    throw ConfigError("unknown sweep axis \"" + axis +
                      "\"; expected alpha, partition, load or guarantee-surface");
  }
}

LoadedPlan load_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open plan file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid plan JSON: " + e.what());
  }
  LoadedPlan plan;
  try {
    plan.strategy = doc.at("strategy").get<std::string>();
    plan.placement = doc.at("placement").get<std::vector<int>>();
    plan.schedules = doc.at("schedules").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed plan file: " + e.what());
  }
  return plan;
}

void cmd_service_life(const ExperimentConfig& config,
                      const std::vector<std::string>& plan_paths) {
  if (plan_paths.empty()) {
    throw ConfigError("service-life needs at least one plan file");
  }
  std::vector<std::string> rows;
  for (const std::string& path : plan_paths) {
    const LoadedPlan plan = load_plan(path);
    if (plan.schedules.size() != config.durations.size()) {
      throw ConfigError(path + ": plan has " + std::to_string(plan.schedules.size()) +
                        " states but the configuration defines " +
                        std::to_string(config.durations.size()));
    }
    const std::vector<ServiceLifeRow> report =
        service_life(plan.placement, plan.schedules, config.durations,
                     config.dtr_lifetime_years, config.service_years);
    const std::string label = fs::path(path).stem().string();
    for (const ServiceLifeRow& r : report) {
      std::ostringstream row;
      row << label << ',' << r.line << ',' << fmt_num(r.years) << ','
          << fmt_num(r.fraction) << ',' << fmt_num(r.residual);
      rows.push_back(row.str());
      std::cout << label << " line " << r.line << ": " << fmt_num(r.years)
                << " years -> residual " << fmt_num(r.residual) << "\n";
    }
  }
  write_csv(config.out_dir + "/service_life.csv", "plan,line,years,fraction,residual",
            rows);
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"two-stage DTR placement and operation experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string strategy = "scg";
  std::string axis;
  std::string out_override;
  std::uint64_t seed_override = 0;
  int threads_override = 0;
  std::vector<std::string> plan_paths;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration JSON")->required();
    sub->add_option("--seed", seed_override, "override the configured RNG seed");
    sub->add_option("--threads", threads_override, "override the configured worker count");
    sub->add_option("--out", out_override, "override the configured output directory");
  };

  CLI::App* generate =
      app.add_subcommand("generate", "sample and persist the cascade chain database");
  add_common(generate);
  CLI::App* solve =
      app.add_subcommand("solve", "run one placement strategy and write its plan");
  add_common(solve);
  solve->add_option("--strategy", strategy,
                    "scg, rl, fr, lpf, lhf, gs, ma, ls, rg, gpg, gcg or one-stage");
  CLI::App* compare =
      app.add_subcommand("compare", "run every configured strategy and tabulate F and BPI");
  add_common(compare);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one experiment axis");
  add_common(sweep);
  sweep->add_option("--axis", axis, "alpha, partition, load or guarantee-surface")
      ->required();
  CLI::App* service =
      app.add_subcommand("service-life", "tabulate residual DTR service life of plan files");
  add_common(service);
  service->add_option("plans", plan_paths, "plan JSON files written by solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig config = load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) config.seed = seed_override;
    if (sub->count("--threads")) {
      if (threads_override < 0) throw ConfigError("--threads must be >= 0");
      config.threads = threads_override;
    }
    if (sub->count("--out")) config.out_dir = out_override;

    if (sub == generate) {
      cmd_generate(config);
    } else if (sub == solve) {
      cmd_solve(config, strategy);
    } else if (sub == compare) {
      cmd_compare(config);
    } else if (sub == sweep) {
      cmd_sweep(config, axis);
    } else {
      cmd_service_life(config, plan_paths);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "tsso-dtr: configuration error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "tsso-dtr: IO error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "tsso-dtr: numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "tsso-dtr: error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace tsso
