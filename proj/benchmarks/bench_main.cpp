#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tsso/cascade.hpp"
#include "tsso/grid.hpp"
#include "tsso/risk.hpp"
#include "tsso/rng.hpp"
#include "tsso/scg.hpp"
#include "tsso/submodular.hpp"

namespace {

const tsso::Network& net39() {
  static const tsso::Network net = tsso::parse_network(TSSO_DATA_DIR "/ieee39.json");
  return net;
}

tsso::SystemState base_state(const tsso::Network& net) {
  tsso::SystemState st;
  st.index = 0;
  st.load_mult.assign(net.buses.size(), 1.0);
  st.gen_mult.assign(net.buses.size(), 1.0);
  st.duration = 1.0;
  return st;
}

tsso::RiskParams bench_params() {
  tsso::RiskParams params;
  params.alpha = 1.05;
  params.y_ext = 1000.0;
  return params;
}

const tsso::ChainDatabase& bench_db() {
  static const tsso::ChainDatabase db = [] {
    std::vector<tsso::SystemState> states{base_state(net39())};
    states[0].index = 0;
    return tsso::build_database(net39(), states, 200, bench_params(), 7, {}, 1);
  }();
  return db;
}

void BM_DcPowerFlow(benchmark::State& state) {
  const tsso::Network& net = net39();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsso::dc_power_flow(net));
  }
}
BENCHMARK(BM_DcPowerFlow);

void BM_SimulateChain(benchmark::State& state) {
  const tsso::Network& net = net39();
  const tsso::SystemState st = base_state(net);
  const tsso::RiskParams params = bench_params();
  tsso::SplitMix64 rng(1234);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsso::simulate_chain(net, st, params, rng));
  }
}
BENCHMARK(BM_SimulateChain);

void BM_OracleSubfunction(benchmark::State& state) {
  const tsso::RiskOracle oracle(bench_db(), net39(), bench_params());
  // Fresh masks each round so the memo cache does not short-circuit the walk
  // over the chain terms.
  tsso::SplitMix64 rng(99);
  const std::uint64_t ground = (std::uint64_t{1} << 46) - 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle.subfunction(0, rng.next() & ground));
  }
}
BENCHMARK(BM_OracleSubfunction);

void BM_SolveScg(benchmark::State& state) {
  // Synthetic instance: saturating coverage-style sub-functions over 12
  // candidates and 4 states, no grid machinery involved.
  const int n = 12;
  const int m = 4;
  tsso::TssoProblem problem;
  for (int i = 0; i < n; ++i) problem.ground.push_back(i + 1);
  problem.k = 6;
  problem.k_c2 = {2, 3, 2, 3};
  problem.p = 1;
  problem.s_l1 = 0x3F;
  for (int i = 0; i < m; ++i) {
    problem.sub_fns.push_back([i, n](std::uint64_t mask) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (mask & (std::uint64_t{1} << j)) {
          sum += 1.0 / (1.0 + ((j + i) % n));
        }
      }
      return 1.0 - std::exp(-sum);
    });
  }
  for (auto _ : state) {
    const tsso::Decomposition decomp = tsso::modular_decomposition(problem);
    benchmark::DoNotOptimize(tsso::solve_scg(problem, decomp));
  }
}
BENCHMARK(BM_SolveScg);

}  // namespace

BENCHMARK_MAIN();
