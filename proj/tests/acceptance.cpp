// Acceptance gate for the experiment harness: ten independently checkable
// criteria, each printing exactly one [PASS]/[FAIL] line (failure detail goes
// on indented lines above the verdict). Run all criteria with no arguments,
// or a single one by passing its number.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "tsso/baselines.hpp"
#include "tsso/cascade.hpp"
#include "tsso/errors.hpp"
#include "tsso/experiment.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk.hpp"
#include "tsso/rng.hpp"
#include "tsso/scg.hpp"
#include "tsso/submodular.hpp"

using namespace tsso;
using namespace tsso::test;
namespace fs = std::filesystem;

#ifndef TSSO_DATA_DIR
#error "TSSO_DATA_DIR must point at the repository data directory"
#endif
#ifndef TSSO_CONFIG_DIR
#error "TSSO_CONFIG_DIR must point at the repository configs directory"
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failure details; the criterion passes when nothing was recorded.
struct Checker {
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  bool ok() const { return problems.empty(); }
};

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

// The default experiment configuration pointed at the bundled 39-bus case,
// with all outputs redirected into a fresh temporary directory.
ExperimentConfig default_config_in(const fs::path& dir) {
  ExperimentConfig config = load_config(std::string(TSSO_CONFIG_DIR) + "/default.json");
  config.network_path = std::string(TSSO_DATA_DIR) + "/ieee39.json";
  config.out_dir = dir.string();
  config.database_path = (dir / "chains.bin").string();
  return config;
}

// ---------------------------------------------------------------------------
// 1. Guarantee arithmetic reproduces the reference (kappa_f1, error) rows.
bool criterion_1() {
  const auto start = Clock::now();
  Checker check;
  constexpr double kTol = 0.001;
  struct Row {
    double kappa, o_error, pure_expected, certified_expected;
  };
  // reference pairs with their published pure/certified guarantee values
  const std::vector<Row> rows = {
      {0.510, -0.314, 0.8124, 0.4984},
      {0.765, -0.045, 0.7186, 0.6736},
      {0.675, -0.163, 0.7517, 0.5887},
  };
  for (const Row& row : rows) {
    const double pure = pure_guarantee(row.kappa, 1);
    const double certified = pure + row.o_error;
    check.require(std::abs(pure - row.pure_expected) <= kTol,
                  "pure(" + fmt(row.kappa) + ") = " + fmt(pure) + ", expected " +
                      fmt(row.pure_expected));
    check.require(std::abs(certified - row.certified_expected) <= kTol,
                  "certified(" + fmt(row.kappa) + ") = " + fmt(certified) +
                      ", expected " + fmt(row.certified_expected));
  }
  const double elapsed = seconds_since(start);
  check.require(elapsed < 1.0, "took " + fmt(elapsed) + "s, bound is 1s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 1: guarantee arithmetic matches the three reference rows "
               "within 0.001 ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 2. service-life reproduces the reference residual table from schedule
//    fractions fed in as plan files.
bool criterion_2() {
  const auto start = Clock::now();
  Checker check;
  constexpr double kTableTol = 0.005;
  constexpr double kFormulaTol = 1e-9;

  const fs::path dir = temp_dir("accept2");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, "{\"network\": \"unused.json\", \"out_dir\": \"" + dir.string() +
                      "\", \"states\": {\"count\": 10}, \"dtr_lifetime_years\": 6, "
                      "\"service_years\": [2, 4]}");

  // two-stage schedule: how many of the ten states each line serves in
  const std::map<int, int> state_counts = {{3, 5},  {9, 6},  {11, 4}, {16, 6},
                                           {19, 4}, {23, 4}, {27, 3}, {45, 1}};
  std::vector<std::vector<int>> two_stage(10);
  std::vector<int> placement;
  for (const auto& [line, count] : state_counts) {
    placement.push_back(line);
    for (int s = 0; s < count; ++s) two_stage[static_cast<std::size_t>(s)].push_back(line);
  }
  const auto plan_json = [](const std::string& name, const std::vector<int>& placed,
                            const std::vector<std::vector<int>>& schedules) {
    std::ostringstream out;
    out << "{\"strategy\": \"" << name << "\", \"placement\": [";
    for (std::size_t i = 0; i < placed.size(); ++i) out << (i ? ", " : "") << placed[i];
    out << "], \"schedules\": [";
    for (std::size_t s = 0; s < schedules.size(); ++s) {
      out << (s ? ", [" : "[");
      for (std::size_t i = 0; i < schedules[s].size(); ++i)
        out << (i ? ", " : "") << schedules[s][i];
      out << "]";
    }
    out << "]}";
    return out.str();
  };
  const fs::path two_path = dir / "two_stage.json";
  write_file(two_path, plan_json("SCG", placement, two_stage));

  const std::vector<int> one_placement = {3, 9, 11, 16, 19};
  const std::vector<std::vector<int>> one_stage(10, one_placement);
  const fs::path one_path = dir / "one_stage.json";
  write_file(one_path, plan_json("ONE", one_placement, one_stage));

  const int code = run_cli(
      {"service-life", "--config", cfg.string(), one_path.string(), two_path.string()});
  check.require(code == 0, "service-life exited with " + std::to_string(code));

  std::map<std::string, std::pair<double, double>> table;  // plan:line:years -> frac, res
  if (code == 0) {
    const std::vector<std::string> lines = split_lines(read_file(dir / "service_life.csv"));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::vector<std::string> f = split_csv(lines[i]);
      table[f[0] + ":" + f[1] + ":" + f[2]] = {std::stod(f[3]), std::stod(f[4])};
    }
  }
  const auto residual_at = [&check, &table](const std::string& key) {
    const auto it = table.find(key);
    check.require(it != table.end(), "missing service-life row " + key);
    return it == table.end() ? -1.0 : it->second.second;
  };

  // one-stage: every line carries its device the whole horizon
  for (int line : one_placement) {
    const std::string base = "one_stage:" + std::to_string(line) + ":";
    check.require(std::abs(residual_at(base + "2") - 0.67) <= kTableTol,
                  "one-stage line " + std::to_string(line) + " at 2 years: got " +
                      fmt(residual_at(base + "2")) + ", expected 0.67");
    check.require(std::abs(residual_at(base + "4") - 0.33) <= kTableTol,
                  "one-stage line " + std::to_string(line) + " at 4 years: got " +
                      fmt(residual_at(base + "4")) + ", expected 0.33");
  }

  // two-stage reference rows
  const std::vector<std::tuple<int, double, double>> reference = {
      {3, 0.83, 0.67}, {9, 0.80, 0.60}, {45, 0.97, 0.93}};
  for (const auto& [line, y2, y4] : reference) {
    const std::string base = "two_stage:" + std::to_string(line) + ":";
    check.require(std::abs(residual_at(base + "2") - y2) <= kTableTol,
                  "two-stage line " + std::to_string(line) + " at 2 years: got " +
                      fmt(residual_at(base + "2")) + ", expected " + fmt(y2));
    check.require(std::abs(residual_at(base + "4") - y4) <= kTableTol,
                  "two-stage line " + std::to_string(line) + " at 4 years: got " +
                      fmt(residual_at(base + "4")) + ", expected " + fmt(y4));
  }

  // formula oracle across the whole two-stage table
  for (const auto& [line, count] : state_counts) {
    const double fraction = count / 10.0;
    for (double years : {2.0, 4.0}) {
      const std::string key =
          "two_stage:" + std::to_string(line) + ":" + fmt(years).substr(0, 1);
      const auto it = table.find(key);
      check.require(it != table.end(), "missing row " + key);
      if (it == table.end()) continue;
      check.require(std::abs(it->second.first - fraction) <= kFormulaTol,
                    key + ": fraction " + fmt(it->second.first) + " != " + fmt(fraction));
      const double expected = 1.0 - years * fraction / 6.0;
      check.require(std::abs(it->second.second - expected) <= kFormulaTol,
                    key + ": residual " + fmt(it->second.second) + " != " + fmt(expected));
    }
  }

  const double elapsed = seconds_since(start);
  check.require(elapsed < 1.0, "took " + fmt(elapsed) + "s, bound is 1s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 2: service-life CLI reproduces the reference residuals "
               "within 0.005 ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 3. The certified guarantee is a true lower bound on random two-stage
//    instances, and the solver usually clears the 1 - 1/e mark.
bool criterion_3() {
  const auto start = Clock::now();
  Checker check;
  constexpr int kInstances = 60;
  constexpr double kBoundSlack = 1e-9;
  constexpr double kRatioMark = 0.632;

  SplitMix64 meta(20260819);
  int bound_violations = 0;
  int ratio_hits = 0;
  for (int t = 0; t < kInstances; ++t) {
    const int n = 5 + static_cast<int>(meta.index(6));   // 5..10 candidates
    const int k = 2 + static_cast<int>(meta.index(3));   // 2..4 placements
    const int m = 1 + static_cast<int>(meta.index(4));   // 1..4 states
    const int k_c2 = 1 + static_cast<int>(meta.index(
                             static_cast<std::size_t>(std::min(3, k))));
    const int s_l1 = 1 + static_cast<int>(meta.index(static_cast<std::size_t>(n - 1)));
    MarkovInstance inst = make_markov(meta.next(), n, m, k, k_c2, 1, 1.0, s_l1);
    check.require(tsso_enumeration_feasible(inst.problem),
                  "instance " + std::to_string(t) + " exceeded the enumeration budget");

    const Decomposition decomp = modular_decomposition(inst.problem);
    const DtrPlan plan = solve_scg(inst.problem, decomp);
    const GuaranteeReport report = guarantee_report(plan, inst.problem, decomp, true);
    const TssoSolution opt = brute_force_tsso(inst.problem);

    if (plan.value < report.certified * opt.value - kBoundSlack) {
      ++bound_violations;
      check.require(false, "instance " + std::to_string(t) + ": F = " + fmt(plan.value) +
                               " < " + fmt(report.certified) + " * " + fmt(opt.value));
    }
    if (opt.value > 0.0 && plan.value / opt.value >= kRatioMark) ++ratio_hits;
  }
  check.require(bound_violations == 0,
                std::to_string(bound_violations) + " certified-bound violations");
  check.require(ratio_hits * 10 >= kInstances * 9,
                "ratio >= 0.632 on only " + std::to_string(ratio_hits) + "/" +
                    std::to_string(kInstances) + " instances (need 90%)");
  const double elapsed = seconds_since(start);
  check.require(elapsed < 600.0, "took " + fmt(elapsed) + "s, bound is 600s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]") << " criterion 3: certified bound held on "
            << kInstances - bound_violations << "/" << kInstances
            << " random instances, ratio >= 0.632 on " << ratio_hits << " ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 4. The synthetic objective family is exhaustively submodular.
bool criterion_4() {
  const auto start = Clock::now();
  Checker check;
  constexpr int kInstances = 100;
  constexpr double kTol = 1e-9;

  SplitMix64 meta(4242);
  std::size_t violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const int n = 3 + static_cast<int>(meta.index(6));  // 3..8 ground elements
    MarkovInstance inst =
        make_markov(meta.next(), n, 1, std::max(1, n / 2), 1, 1, 1.0, -1);
    const std::vector<SubmodularityViolation> found =
        check_submodularity(inst.problem.sub_fns[0], inst.problem.ground_mask(), kTol);
    violations += found.size();
    if (!found.empty())
      check.require(false, "instance " + std::to_string(t) + " produced " +
                               std::to_string(found.size()) + " violations");
  }
  const double elapsed = seconds_since(start);
  check.require(elapsed < 600.0, "took " + fmt(elapsed) + "s, bound is 600s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]") << " criterion 4: " << kInstances
            << " exhaustive submodularity checks found " << violations
            << " violations at 1e-9 (" << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 5. The surrogate telescoping identity holds at every iteration of every
//    identity-checked solver run.
bool criterion_5() {
  const auto start = Clock::now();
  Checker check;
  constexpr double kTol = 1e-9;

  reset_identity_check_stats();
  std::uint64_t expected_runs = 0;
  std::uint64_t expected_iterations = 0;
  double max_trace_residual = 0.0;
  const auto absorb = [&](const DtrPlan& plan) {
    ++expected_runs;
    expected_iterations += plan.trace.size();
    for (const IterationTrace& it : plan.trace)
      max_trace_residual = std::max(max_trace_residual, std::abs(it.identity_residual));
  };

  for (std::uint64_t seed = 51; seed < 63; ++seed) {
    MarkovInstance inst = make_markov(seed, 8, 3, 4, 2);
    const Decomposition decomp = modular_decomposition(inst.problem);
    absorb(solve_scg(inst.problem, decomp));
    absorb(solve_replacement_greedy(inst.problem, decomp, rg_schedule(inst.problem.k),
                                    "RG", true));
    absorb(solve_replacement_greedy(inst.problem, decomp, gpg_schedule(inst.problem.k),
                                    "GPG", true));
    absorb(solve_replacement_greedy(inst.problem, decomp,
                                    gcg_schedule(inst.problem.k, inst.problem.p), "GCG",
                                    true));
  }
  RiskBench bench = make_risk_bench(2, 300, 13);
  absorb(solve_scg(bench.problem, modular_decomposition(bench.problem)));

  const IdentityCheckStats stats = identity_check_stats();
  check.require(stats.runs == expected_runs,
                "registry saw " + std::to_string(stats.runs) + " runs, expected " +
                    std::to_string(expected_runs));
  check.require(stats.iterations == expected_iterations,
                "registry saw " + std::to_string(stats.iterations) +
                    " iterations, expected " + std::to_string(expected_iterations));
  check.require(stats.iterations > 0, "no iterations were identity-checked");
  check.require(stats.max_residual <= kTol,
                "max residual " + fmt(stats.max_residual) + " exceeds 1e-9");
  check.require(max_trace_residual <= kTol,
                "max per-trace residual " + fmt(max_trace_residual) + " exceeds 1e-9");

  const double elapsed = seconds_since(start);
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]") << " criterion 5: identity residual <= 1e-9 over "
            << stats.iterations << " iterations in " << stats.runs << " solver runs ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 6. Chain reweighting equals direct probability recomputation, and weights
//    chain multiplicatively across nested DTR sets.
bool criterion_6() {
  const auto start = Clock::now();
  Checker check;
  constexpr int kTriples = 1000;
  constexpr double kDirectTol = 1e-10;
  constexpr double kChainTol = 1e-12;

  RiskBench bench = make_risk_bench(2, 500, 17, 1.07);
  std::vector<const FailureChain*> chains;
  for (const std::vector<FailureChain>& state : bench.db.states)
    for (const FailureChain& chain : state) chains.push_back(&chain);

  const auto to_set = [](std::uint64_t mask) {
    DtrSet out;
    for (int g = 0; g < 5; ++g)
      if (mask & (std::uint64_t{1} << g)) out.insert(g + 1);
    return out;
  };

  SplitMix64 rng(606);
  int direct_bad = 0;
  int chain_bad = 0;
  for (int t = 0; t < kTriples; ++t) {
    const FailureChain& chain = *chains[rng.index(chains.size())];
    const std::uint64_t mask_a = rng.next() & 0x1F;
    const std::uint64_t mask_b = rng.next() & 0x1F;
    const DtrSet a = to_set(mask_a);
    const DtrSet b = to_set(mask_b);

    const double w = sampling_weight(chain, bench.net, a, b, bench.params);
    const double pa = chain_probability(chain, bench.net, a, bench.params);
    const double pb = chain_probability(chain, bench.net, b, bench.params);
    const double direct = pa / pb;
    if (std::abs(w - direct) > kDirectTol * std::abs(direct)) {
      ++direct_bad;
      if (direct_bad <= 3)
        check.require(false, "triple " + std::to_string(t) + ": weight " + fmt(w) +
                                 " vs direct " + fmt(direct));
    }

    // nested sets: moving from A to empty in one hop or through B inside A
    const std::uint64_t mask_sub = mask_a & rng.next();
    const DtrSet sub = to_set(mask_sub);
    const double w_a0 = sampling_weight(chain, bench.net, a, DtrSet{}, bench.params);
    const double w_ab = sampling_weight(chain, bench.net, a, sub, bench.params);
    const double w_b0 = sampling_weight(chain, bench.net, sub, DtrSet{}, bench.params);
    if (std::abs(w_a0 - w_ab * w_b0) > kChainTol * std::abs(w_a0)) {
      ++chain_bad;
      if (chain_bad <= 3)
        check.require(false, "triple " + std::to_string(t) + ": chained weight " +
                                 fmt(w_ab * w_b0) + " vs direct " + fmt(w_a0));
    }
  }
  check.require(direct_bad == 0,
                std::to_string(direct_bad) + " reweighting mismatches beyond 1e-10");
  check.require(chain_bad == 0,
                std::to_string(chain_bad) + " chaining mismatches beyond 1e-12");

  const double elapsed = seconds_since(start);
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]") << " criterion 6: " << kTriples
            << " reweighting triples matched direct recomputation (" << fmt(elapsed)
            << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 7. Full 39-bus run: capacity widening strictly helps, and the no-widening
//    row is exactly zero.
bool criterion_7() {
  const auto start = Clock::now();
  Checker check;

  const fs::path dir = temp_dir("accept7");
  const ExperimentConfig config = default_config_in(dir);
  cmd_generate(config);
  cmd_sweep(config, "alpha");

  const std::vector<std::string> lines = split_lines(read_file(dir / "alpha.csv"));
  check.require(lines.size() == config.alpha_list.size() + 1,
                "alpha.csv has " + std::to_string(lines.size()) + " lines");
  double prev_f = -1.0;
  double prev_risk = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split_csv(lines[i]);
    if (f.size() != 4) {
      check.require(false, "malformed row: " + lines[i]);
      continue;
    }
    const double alpha = std::stod(f[0]);
    const double value = std::stod(f[1]);
    const double risk = std::stod(f[2]);
    const double bpi = std::stod(f[3]);
    if (i == 1) {
      check.require(f[0] == "1", "first row alpha is " + f[0]);
      check.require(f[1] == "0", "F at alpha = 1 printed as " + f[1] + ", not exactly 0");
      check.require(f[3] == "0", "BPI at alpha = 1 printed as " + f[3] + ", not exactly 0");
    } else {
      check.require(value > prev_f, "F not strictly increasing at alpha = " + f[0] +
                                        ": " + fmt(value) + " vs " + fmt(prev_f));
      check.require(risk < prev_risk, "RiskW not strictly decreasing at alpha = " + f[0] +
                                          ": " + fmt(risk) + " vs " + fmt(prev_risk));
      check.require(bpi > 0.0, "BPI not positive at alpha = " + f[0]);
    }
    (void)alpha;
    prev_f = value;
    prev_risk = risk;
  }

  const double elapsed = seconds_since(start);
  check.require(elapsed < 1800.0, "took " + fmt(elapsed) + "s, bound is 1800s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 7: 39-bus alpha sweep is strictly monotone with an exact "
               "zero baseline ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 8. Full 39-bus comparison: two-stage beats one-stage, the solver under test
//    is never beaten, and No-DTR is exactly (0, 0).
bool criterion_8() {
  const auto start = Clock::now();
  Checker check;

  const fs::path dir = temp_dir("accept8");
  const ExperimentConfig config = default_config_in(dir);
  cmd_generate(config);
  cmd_compare(config);

  const std::vector<std::string> lines = split_lines(read_file(dir / "comparison.csv"));
  check.require(lines.size() == 13, "comparison.csv has " + std::to_string(lines.size()) +
                                        " lines, expected 13");
  double f_scg = -1.0;
  std::map<std::string, double> f_by_kind;
  bool no_dtr_exact = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split_csv(lines[i]);
    if (f.size() != 3) {
      check.require(false, "malformed row: " + lines[i]);
      continue;
    }
    if (f[0] == "No-DTR") {
      no_dtr_exact = f[1] == "0" && f[2] == "0";
    } else {
      f_by_kind[f[0]] = std::stod(f[1]);
      if (f[0] == "SCG") f_scg = std::stod(f[1]);
    }
  }
  check.require(no_dtr_exact, "No-DTR row is not exactly (0, 0)");
  check.require(f_by_kind.size() == 11, "expected 11 strategy rows, saw " +
                                            std::to_string(f_by_kind.size()));
  check.require(f_scg >= 0.0, "SCG row missing");
  for (const auto& [kind, value] : f_by_kind) {
    check.require(f_scg >= value - 1e-12,
                  "F(SCG) = " + fmt(f_scg) + " < F(" + kind + ") = " + fmt(value));
  }

  const std::vector<std::string> stage = split_lines(read_file(dir / "stage_compare.csv"));
  check.require(!stage.empty() && split_csv(stage.back())[0] == "mean",
                "stage_compare.csv has no mean row");
  if (!stage.empty()) {
    const std::vector<std::string> mean = split_csv(stage.back());
    if (mean.size() >= 5) {
      const double f_one = std::stod(mean[1]);
      const double f_two = std::stod(mean[4]);
      check.require(f_two >= f_one - 1e-12, "two-stage mean F = " + fmt(f_two) +
                                                " < one-stage F = " + fmt(f_one));
    } else {
      check.require(false, "malformed mean row");
    }
  }

  const double elapsed = seconds_since(start);
  check.require(elapsed < 1800.0, "took " + fmt(elapsed) + "s, bound is 1800s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 8: 39-bus comparison keeps SCG on top of all baselines ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 9. Solve cost scales at most linearly (within 2.2x) when the state count or
//    the chain count doubles.
bool criterion_9() {
  const auto start = Clock::now();
  Checker check;
  constexpr double kRatioBound = 2.2;

  const Network net = parse_network(std::string(TSSO_DATA_DIR) + "/ieee39.json");
  RiskParams params;  // defaults; only the solve cost matters here
  const int threads = std::max(1u, std::thread::hardware_concurrency());

  const auto states_for = [&net](int count) {
    const ExperimentConfig cfg = parse_config_text(
        "{\"network\": \"unused.json\", \"states\": {\"count\": " + std::to_string(count) +
            "}}",
        "criterion9");
    return make_states(cfg, net);
  };
  const auto solve_once = [&](const ChainDatabase& db) {
    const auto t0 = Clock::now();
    RiskOracle oracle(db, net, params);
    TssoProblem problem;
    problem.ground = oracle.ground();
    problem.k = 6;
    problem.k_c2.assign(db.states.size(), 3);
    problem.p = 1;
    problem.s_l1 = (std::uint64_t{1} << 23) - 1;
    for (int i = 0; i < oracle.num_states(); ++i)
      problem.sub_fns.push_back(oracle.subfunction_oracle(i));
    const Decomposition decomp = modular_decomposition(problem);
    const DtrPlan plan = solve_scg(problem, decomp);
    const double dt = seconds_since(t0);
    check.require(plan.schedules.size() == db.states.size(), "solver lost states");
    return dt;
  };
  const std::vector<SystemState> base_states = states_for(5);
  const std::vector<SystemState> wide_states = states_for(10);
  const ChainDatabase db_base = build_database(net, base_states, 8000, params, 99, {}, threads);
  const ChainDatabase db_m = build_database(net, wide_states, 8000, params, 99, {}, threads);
  const ChainDatabase db_d = build_database(net, base_states, 16000, params, 99, {}, threads);

  // Interleave the repetitions so frequency drift hits all three databases
  // alike, and keep the fastest rep of each as the noise-free estimate.
  solve_once(db_base);  // warm caches before timing
  double t_base = 1e18;
  double t_m = 1e18;
  double t_d = 1e18;
  for (int rep = 0; rep < 5; ++rep) {
    t_base = std::min(t_base, solve_once(db_base));
    t_m = std::min(t_m, solve_once(db_m));
    t_d = std::min(t_d, solve_once(db_d));
  }

  const double ratio_m = t_m / t_base;
  const double ratio_d = t_d / t_base;
  check.require(ratio_m <= kRatioBound,
                "doubling states: " + fmt(t_m) + "s / " + fmt(t_base) + "s = " +
                    fmt(ratio_m) + " > 2.2");
  check.require(ratio_d <= kRatioBound,
                "doubling chains: " + fmt(t_d) + "s / " + fmt(t_base) + "s = " +
                    fmt(ratio_d) + " > 2.2");

  const double elapsed = seconds_since(start);
  check.require(elapsed < 600.0, "took " + fmt(elapsed) + "s, bound is 600s");
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 9: solve time ratios m x2 = " << fmt(ratio_m)
            << ", D x2 = " << fmt(ratio_d) << ", bound 2.2 (" << fmt(elapsed) << "s)\n";
  return check.ok();
}

// ---------------------------------------------------------------------------
// 10. Identical configuration and seed give byte-identical databases and
//     output files across independent runs.
bool criterion_10() {
  const auto start = Clock::now();
  Checker check;

  const fs::path dir = temp_dir("accept10");
  const fs::path net_path = dir / "diamond.json";
  write_file(net_path, diamond_text());
  const fs::path cfg = dir / "config.json";
  write_file(cfg, "{\"network\": \"" + net_path.string() +
                      "\", \"seed\": 9, \"states\": {\"count\": 2}, "
                      "\"chains_per_state\": 300, \"d_max\": 12, "
                      "\"risk\": {\"y_ext\": 100.0, \"alpha\": 1.1}, "
                      "\"constraints\": {\"k\": 3, \"k_c2\": 2, \"p\": 1}}");

  for (int run = 1; run <= 2; ++run) {
    const std::string out = (dir / ("run" + std::to_string(run))).string();
    const int gen = run_cli({"generate", "--config", cfg.string(), "--out", out});
    const int solve =
        run_cli({"solve", "--config", cfg.string(), "--out", out, "--strategy", "scg"});
    check.require(gen == 0, "run " + std::to_string(run) + ": generate exited " +
                                std::to_string(gen));
    check.require(solve == 0, "run " + std::to_string(run) + ": solve exited " +
                                  std::to_string(solve));
  }

  for (const std::string& name :
       {std::string("chains.bin"), std::string("generate_summary.csv"),
        std::string("plan_SCG.json"), std::string("guarantee_SCG.csv")}) {
    const std::string a = read_file(dir / "run1" / name);
    const std::string b = read_file(dir / "run2" / name);
    check.require(!a.empty(), name + " is empty in run1");
    check.require(a == b, name + " differs between identical runs");
  }

  const double elapsed = seconds_since(start);
  for (const std::string& p : check.problems) std::cout << "  violated: " << p << "\n";
  std::cout << (check.ok() ? "[PASS]" : "[FAIL]")
            << " criterion 10: repeated generate + solve runs are byte-identical ("
            << fmt(elapsed) << "s)\n";
  return check.ok();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<bool (*)()> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

  std::vector<int> wanted;
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::cerr << "usage: tsso-acceptance [1.." << criteria.size() << "]\n";
      return 2;
    }
    wanted.push_back(id);
  } else {
    for (int id = 1; id <= static_cast<int>(criteria.size()); ++id) wanted.push_back(id);
  }

  int failures = 0;
  for (int id : wanted) {
    try {
      if (!criteria[static_cast<std::size_t>(id - 1)]()) ++failures;
    } catch (const std::exception& e) {
      std::cout << "[FAIL] criterion " << id << ": unhandled error: " << e.what() << "\n";
      ++failures;
    }
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  return 0;
}
