#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace tsso {

struct Bus {
  int id = 0;
  double load = 0.0;     // base demand, MW
  double gen = 0.0;      // scheduled generation, MW
  double gen_max = 0.0;  // generation capability ceiling, MW (data only)
};

struct Line {
  int id = 0;
  int from = 0;          // bus id
  int to = 0;            // bus id
  double reactance = 0.0;  // p.u., > 0
  double p_max = 0.0;      // thermal limit, MW
  double p_min = 0.0;      // lower threshold of the overload curve, MW
};

// Immutable after construction (parse_network / apply_state both return fully
// indexed copies); safe to share across threads.
struct Network {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  int slack_bus = 0;

  // id -> position lookups; positions are indexes into buses/lines
  int bus_pos(int id) const;
  int line_pos(int id) const;
  void rebuild_index();

  std::vector<int> line_ids() const;

private:
  std::unordered_map<int, int> bus_index_;
  std::unordered_map<int, int> line_index_;
};

struct SystemState {
  int index = 0;
  std::vector<double> load_mult;  // per bus position, >= 0
  std::vector<double> gen_mult;   // per bus position, >= 0
  double duration = 1.0;          // fraction of the planning horizon
};

struct FlowSolution {
  std::vector<double> flow;           // per line position, MW, signed; 0 when out
  std::vector<int> island_of;         // per bus position, island index
  std::vector<double> island_served;  // MW actually served per island
  double shed = 0.0;                  // total load shed, MW
  bool degenerate = false;            // an island admittance was singular
};

// Reads and validates a network JSON document (see README for the schema).
// Throws ConfigError on schema/invariant violations, IoError when the file
// cannot be read.
Network parse_network(const std::string& path);
Network parse_network_text(const std::string& text, const std::string& origin);

// Element-wise load/generation scaling; topology untouched.
Network apply_state(const Network& net, const SystemState& state);

// Linearized (DC) power flow with island handling. Islands missing either
// generation or load serve nothing; the rest are rebalanced by scaling
// generation down to load, or shedding load proportionally, before the solve.
FlowSolution dc_power_flow(const Network& net, const std::vector<std::uint8_t>& in_service);
FlowSolution dc_power_flow(const Network& net, const std::set<int>& outaged_ids = {});

}  // namespace tsso
