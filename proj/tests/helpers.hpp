#pragma once

#include <unistd.h>

#include <atomic>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tsso/cascade.hpp"
#include "tsso/experiment.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk.hpp"
#include "tsso/rng.hpp"
#include "tsso/submodular.hpp"

namespace tsso::test {

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("tsso-" + tag + "-" + std::to_string(::getpid()) + "-" +
       std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("tsso-dtr");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

inline std::string first_line(const std::string& text) {
  const std::size_t pos = text.find('\n');
  return pos == std::string::npos ? text : text.substr(0, pos);
}

// Four-bus diamond with a tie line: outages can island the load bus, so
// cascades produce real load loss without needing the 39-bus case.
inline std::string diamond_text() {
  return R"({
    "buses": [
      {"id": 1, "load": 0.0, "gen": 150.0, "gen_max": 200.0},
      {"id": 2, "load": 0.0, "gen": 0.0, "gen_max": 0.0},
      {"id": 3, "load": 0.0, "gen": 0.0, "gen_max": 0.0},
      {"id": 4, "load": 150.0, "gen": 0.0, "gen_max": 0.0}
    ],
    "lines": [
      {"id": 1, "from": 1, "to": 2, "reactance": 0.1, "p_min": 60.0, "p_max": 120.0},
      {"id": 2, "from": 2, "to": 4, "reactance": 0.1, "p_min": 60.0, "p_max": 120.0},
      {"id": 3, "from": 1, "to": 3, "reactance": 0.1, "p_min": 60.0, "p_max": 120.0},
      {"id": 4, "from": 3, "to": 4, "reactance": 0.1, "p_min": 60.0, "p_max": 120.0},
      {"id": 5, "from": 2, "to": 3, "reactance": 0.1, "p_min": 60.0, "p_max": 120.0}
    ],
    "slack_bus": 1
  })";
}

inline Network diamond_net() { return parse_network_text(diamond_text(), "diamond"); }

inline std::vector<SystemState> flat_states(const Network& net, int count,
                                            double mult = 1.0) {
  std::vector<SystemState> states;
  for (int l = 0; l < count; ++l) {
    SystemState st;
    st.index = l;
    st.load_mult.assign(net.buses.size(), mult);
    st.gen_mult.assign(net.buses.size(), mult);
    st.duration = 1.0 / count;
    states.push_back(std::move(st));
  }
  return states;
}

// A ready-to-solve risk instance over the diamond network.
struct RiskBench {
  Network net;
  std::vector<SystemState> states;
  RiskParams params;
  ChainDatabase db;
  std::unique_ptr<RiskOracle> oracle;
  TssoProblem problem;
};

inline RiskBench make_risk_bench(int states_n = 2, int chains = 400,
                                 std::uint64_t seed = 11, double alpha = 1.08) {
  RiskBench b;
  b.net = diamond_net();
  b.states = flat_states(b.net, states_n);
  b.params.alpha = alpha;
  b.params.y_ext = 100.0;
  b.db = build_database(b.net, b.states, chains, b.params, seed, {}, 1);
  b.oracle = std::make_unique<RiskOracle>(b.db, b.net, b.params);
  b.problem.ground = b.oracle->ground();
  b.problem.k = 3;
  b.problem.k_c2.assign(static_cast<std::size_t>(states_n), 2);
  b.problem.p = 1;
  b.problem.s_l1 = 0b00111;  // lines 1..3 first, 4..5 second
  for (int i = 0; i < states_n; ++i) {
    b.problem.sub_fns.push_back(b.oracle->subfunction_oracle(i));
  }
  b.problem.validate();
  return b;
}

// Multiplicative Markov family: Y_i(T) = cons_i - prod_{e in T} r_{i,e} with
// r in (0, 1]. Monotone and submodular for any cons_i; cons_i = 1 gives
// Y_i(empty) = 0 as the solvers require.
struct MarkovInstance {
  std::shared_ptr<std::vector<std::vector<double>>> retention;  // [state][pos]
  std::vector<double> cons;
  TssoProblem problem;
};

inline SetFn markov_fn(std::shared_ptr<std::vector<std::vector<double>>> retention,
                       double cons, int state) {
  return [retention, cons, state](std::uint64_t mask) {
    double prod = 1.0;
    const std::vector<double>& row = (*retention)[static_cast<std::size_t>(state)];
    std::uint64_t rest = mask;
    while (rest) {
      prod *= row[static_cast<std::size_t>(std::countr_zero(rest))];
      rest &= rest - 1;
    }
    return cons - prod;
  };
}

inline MarkovInstance make_markov(std::uint64_t seed, int n, int m, int k,
                                  int k_c2, int p = 1, double cons = 1.0,
                                  int s_l1_size = -1) {
  MarkovInstance inst;
  inst.retention = std::make_shared<std::vector<std::vector<double>>>();
  SplitMix64 rng(mix_key(seed, 0xABCD));
  for (int i = 0; i < m; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (double& r : row) r = 0.30 + 0.68 * rng.uniform();  // (0.30, 0.98)
    inst.retention->push_back(std::move(row));
    inst.cons.push_back(cons);
  }
  for (int e = 0; e < n; ++e) inst.problem.ground.push_back(e + 1);
  inst.problem.k = k;
  inst.problem.k_c2.assign(static_cast<std::size_t>(m), k_c2);
  inst.problem.p = p;
  const int first = s_l1_size >= 0 ? s_l1_size : (n + 1) / 2;
  inst.problem.s_l1 = first >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << first) - 1;
  for (int i = 0; i < m; ++i) {
    inst.problem.sub_fns.push_back(markov_fn(inst.retention, cons, i));
  }
  inst.problem.validate();
  return inst;
}

}  // namespace tsso::test
