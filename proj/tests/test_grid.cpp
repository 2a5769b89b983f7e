#include "doctest.h"

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "tsso/errors.hpp"
#include "tsso/grid.hpp"

using namespace tsso;
using namespace tsso::test;

TEST_CASE("two-bus network carries the whole load over its single line") {
  const Network net = parse_network_text(R"({
    "buses": [
      {"id": 1, "load": 0.0, "gen": 100.0, "gen_max": 120.0},
      {"id": 2, "load": 100.0, "gen": 0.0, "gen_max": 0.0}
    ],
    "lines": [
      {"id": 1, "from": 1, "to": 2, "reactance": 0.1, "p_min": 120.0, "p_max": 180.0}
    ],
    "slack_bus": 1
  })", "twobus");
  const FlowSolution sol = dc_power_flow(net);
  CHECK(sol.flow.size() == 1);
  CHECK(sol.flow[0] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(sol.shed == doctest::Approx(0.0));
}

TEST_CASE("triangle splits 90 MW as 60 direct and 30 around") {
  // Equal reactances: the one-hop path carries twice the two-hop path's
  // share, an independently derivable DC solution.
  const Network net = parse_network_text(R"({
    "buses": [
      {"id": 1, "load": 0.0, "gen": 90.0, "gen_max": 90.0},
      {"id": 2, "load": 0.0, "gen": 0.0, "gen_max": 0.0},
      {"id": 3, "load": 90.0, "gen": 0.0, "gen_max": 0.0}
    ],
    "lines": [
      {"id": 1, "from": 1, "to": 2, "reactance": 0.1, "p_min": 80.0, "p_max": 100.0},
      {"id": 2, "from": 2, "to": 3, "reactance": 0.1, "p_min": 80.0, "p_max": 100.0},
      {"id": 3, "from": 1, "to": 3, "reactance": 0.1, "p_min": 80.0, "p_max": 100.0}
    ],
    "slack_bus": 1
  })", "triangle");
  const FlowSolution sol = dc_power_flow(net);
  CHECK(std::abs(sol.flow[0]) == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(std::abs(sol.flow[1]) == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(std::abs(sol.flow[2]) == doctest::Approx(60.0).epsilon(1e-10));
}

TEST_CASE("islanding a load bus sheds its demand") {
  const Network net = diamond_net();
  const FlowSolution sol = dc_power_flow(net, std::set<int>{2, 4});
  CHECK(sol.shed == doctest::Approx(150.0).epsilon(1e-12));
}

TEST_CASE("outaging one diamond line leaves everything served") {
  const Network net = diamond_net();
  const FlowSolution sol = dc_power_flow(net, std::set<int>{2});
  CHECK(sol.shed == doctest::Approx(0.0));
}

TEST_CASE("network schema is strict") {
  CHECK_THROWS_AS(parse_network_text(R"({"buses": [], "lines": [], "slack_bus": 1,
                                         "comment": "x"})", "t"),
                  ConfigError);
  CHECK_THROWS_AS(parse_network_text(R"({
    "buses": [{"id": 1, "load": 0.0, "gen": 1.0, "gen_max": 1.0, "area": 2},
              {"id": 2, "load": 1.0, "gen": 0.0, "gen_max": 0.0}],
    "lines": [{"id": 1, "from": 1, "to": 2, "reactance": 0.1, "p_max": 10.0}],
    "slack_bus": 1})", "t"),
                  ConfigError);
  // dangling endpoint
  CHECK_THROWS_AS(parse_network_text(R"({
    "buses": [{"id": 1, "load": 0.0, "gen": 1.0, "gen_max": 1.0},
              {"id": 2, "load": 1.0, "gen": 0.0, "gen_max": 0.0}],
    "lines": [{"id": 1, "from": 1, "to": 7, "reactance": 0.1, "p_max": 10.0}],
    "slack_bus": 1})", "t"),
                  ConfigError);
  // p_min must stay below p_max
  CHECK_THROWS_AS(parse_network_text(R"({
    "buses": [{"id": 1, "load": 0.0, "gen": 1.0, "gen_max": 1.0},
              {"id": 2, "load": 1.0, "gen": 0.0, "gen_max": 0.0}],
    "lines": [{"id": 1, "from": 1, "to": 2, "reactance": 0.1,
               "p_min": 10.0, "p_max": 10.0}],
    "slack_bus": 1})", "t"),
                  ConfigError);
  // disconnected base network
  CHECK_THROWS_AS(parse_network_text(R"({
    "buses": [{"id": 1, "load": 0.0, "gen": 1.0, "gen_max": 1.0},
              {"id": 2, "load": 1.0, "gen": 0.0, "gen_max": 0.0},
              {"id": 3, "load": 0.0, "gen": 0.0, "gen_max": 0.0},
              {"id": 4, "load": 0.0, "gen": 0.0, "gen_max": 0.0}],
    "lines": [{"id": 1, "from": 1, "to": 2, "reactance": 0.1, "p_max": 10.0},
              {"id": 2, "from": 3, "to": 4, "reactance": 0.1, "p_max": 10.0}],
    "slack_bus": 1})", "t"),
                  ConfigError);
}

TEST_CASE("apply_state scales loads and generation per bus") {
  const Network net = diamond_net();
  SystemState st;
  st.index = 0;
  st.load_mult.assign(net.buses.size(), 1.5);
  st.gen_mult.assign(net.buses.size(), 1.5);
  st.duration = 1.0;
  const Network scaled = apply_state(net, st);
  CHECK(scaled.buses[3].load == doctest::Approx(225.0));
  CHECK(scaled.buses[0].gen == doctest::Approx(225.0));
  SystemState bad;
  bad.load_mult.assign(2, 1.0);
  bad.gen_mult.assign(2, 1.0);
  CHECK_THROWS_AS(apply_state(net, bad), ConfigError);
}

TEST_CASE("the shipped 39-bus fixture parses and balances") {
  const Network net = parse_network(TSSO_DATA_DIR "/ieee39.json");
  CHECK(net.buses.size() == 39);
  CHECK(net.lines.size() == 46);
  CHECK(net.slack_bus == 31);
  double load = 0.0;
  for (const Bus& b : net.buses) load += b.load;
  CHECK(load == doctest::Approx(6254.23).epsilon(1e-9));
  const FlowSolution sol = dc_power_flow(net);
  CHECK(sol.shed == doctest::Approx(0.0));
  // base-case flows stay inside the static band on every line
  for (std::size_t e = 0; e < net.lines.size(); ++e) {
    CHECK(std::abs(sol.flow[e]) < net.lines[e].p_max);
  }
}
