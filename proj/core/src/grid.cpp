#include "tsso/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tsso/errors.hpp"
#include "tsso/log.hpp"

namespace tsso {

using nlohmann::json;

int Network::bus_pos(int id) const {
  auto it = bus_index_.find(id);
  if (it == bus_index_.end()) throw ConfigError("unknown bus id " + std::to_string(id));
  return it->second;
}

int Network::line_pos(int id) const {
  auto it = line_index_.find(id);
  if (it == line_index_.end()) throw ConfigError("unknown line id " + std::to_string(id));
  return it->second;
}

void Network::rebuild_index() {
  bus_index_.clear();
  line_index_.clear();
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!bus_index_.emplace(buses[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate bus id " + std::to_string(buses[i].id));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!line_index_.emplace(lines[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate line id " + std::to_string(lines[i].id));
  }
}

std::vector<int> Network::line_ids() const {
  std::vector<int> ids;
  ids.reserve(lines.size());
  for (const Line& l : lines) ids.push_back(l.id);
  return ids;
}

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) { known = true; break; }
    if (!known) throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

int require_int(const json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field)) throw ConfigError(where + ": missing field '" + field + "'");
  const json& v = obj.at(field);
  if (!v.is_number_integer()) throw ConfigError(where + ": field '" + field + "' must be an integer");
  return v.get<int>();
}

double require_number(const json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field)) throw ConfigError(where + ": missing field '" + field + "'");
  const json& v = obj.at(field);
  if (!v.is_number()) throw ConfigError(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

double optional_number(const json& obj, const char* field, double fallback, const std::string& where) {
  if (!obj.contains(field)) return fallback;
  const json& v = obj.at(field);
  if (!v.is_number()) throw ConfigError(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

void validate_network(const Network& net, const std::string& origin) {
  if (net.buses.empty()) throw ConfigError(origin + ": no buses");
  if (net.lines.empty()) throw ConfigError(origin + ": no lines");

  for (const Bus& b : net.buses) {
    const std::string where = origin + ": bus " + std::to_string(b.id);
    if (b.load < 0) throw ConfigError(where + ": negative load");
    if (b.gen < 0) throw ConfigError(where + ": negative generation");
    if (b.gen_max < 0) throw ConfigError(where + ": negative gen_max");
  }
  for (const Line& l : net.lines) {
    const std::string where = origin + ": line " + std::to_string(l.id);
    if (l.reactance <= 0) throw ConfigError(where + ": reactance must be > 0");
    if (l.p_max <= 0) throw ConfigError(where + ": p_max must be > 0");
    if (l.p_min < 0) throw ConfigError(where + ": p_min must be >= 0");
    if (l.p_min >= l.p_max) throw ConfigError(where + ": p_min must be < p_max");
    net.bus_pos(l.from);  // throws on dangling endpoint
    net.bus_pos(l.to);
  }
  net.bus_pos(net.slack_bus);

  // the full network must be connected; islands only appear after outages
  const std::size_t nb = net.buses.size();
  std::vector<std::vector<int>> adj(nb);
  for (const Line& l : net.lines) {
    int a = net.bus_pos(l.from), b = net.bus_pos(l.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(nb, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
  }
  if (reached != nb) throw ConfigError(origin + ": network graph is not connected");
}

}  // namespace

Network parse_network_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
  reject_unknown_fields(doc, {"buses", "lines", "slack_bus"}, origin);
  if (!doc.contains("buses") || !doc["buses"].is_array())
    throw ConfigError(origin + ": missing 'buses' array");
  if (!doc.contains("lines") || !doc["lines"].is_array())
    throw ConfigError(origin + ": missing 'lines' array");

  Network net;
  for (std::size_t i = 0; i < doc["buses"].size(); ++i) {
    const json& jb = doc["buses"][i];
    const std::string where = origin + ": buses[" + std::to_string(i) + "]";
    if (!jb.is_object()) throw ConfigError(where + ": must be an object");
    reject_unknown_fields(jb, {"id", "load", "gen", "gen_max"}, where);
    Bus b;
    b.id = require_int(jb, "id", where);
    b.load = require_number(jb, "load", where);
    b.gen = require_number(jb, "gen", where);
    b.gen_max = require_number(jb, "gen_max", where);
    net.buses.push_back(b);
  }
  for (std::size_t i = 0; i < doc["lines"].size(); ++i) {
    const json& jl = doc["lines"][i];
    const std::string where = origin + ": lines[" + std::to_string(i) + "]";
    if (!jl.is_object()) throw ConfigError(where + ": must be an object");
    reject_unknown_fields(jl, {"id", "from", "to", "reactance", "p_max", "p_min"}, where);
    Line l;
    l.id = require_int(jl, "id", where);
    l.from = require_int(jl, "from", where);
    l.to = require_int(jl, "to", where);
    l.reactance = require_number(jl, "reactance", where);
    l.p_max = require_number(jl, "p_max", where);
    l.p_min = optional_number(jl, "p_min", 0.0, where);
    net.lines.push_back(l);
  }
  net.slack_bus = require_int(doc, "slack_bus", origin);

  net.rebuild_index();
  validate_network(net, origin);
  return net;
}

Network parse_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open network file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network_text(buf.str(), path);
}

Network apply_state(const Network& net, const SystemState& state) {
  if (state.load_mult.size() != net.buses.size() || state.gen_mult.size() != net.buses.size())
    throw ConfigError("system state multiplier vectors do not match bus count (" +
                      std::to_string(state.load_mult.size()) + "/" +
                      std::to_string(state.gen_mult.size()) + " vs " +
                      std::to_string(net.buses.size()) + " buses)");
  Network out = net;
  for (std::size_t i = 0; i < out.buses.size(); ++i) {
    if (state.load_mult[i] < 0 || state.gen_mult[i] < 0)
      throw ConfigError("system state multipliers must be >= 0");
    out.buses[i].load *= state.load_mult[i];
    out.buses[i].gen *= state.gen_mult[i];
  }
  return out;
}

FlowSolution dc_power_flow(const Network& net, const std::vector<std::uint8_t>& in_service) {
  const std::size_t nb = net.buses.size();
  const std::size_t nl = net.lines.size();
  if (in_service.size() != nl)
    throw ConfigError("in_service mask size does not match line count");

  FlowSolution sol;
  sol.flow.assign(nl, 0.0);
  sol.island_of.assign(nb, -1);

  // endpoints as positions, once
  std::vector<int> from(nl), to(nl);
  for (std::size_t e = 0; e < nl; ++e) {
    from[e] = net.bus_pos(net.lines[e].from);
    to[e] = net.bus_pos(net.lines[e].to);
  }

  // island labels via BFS over in-service lines
  std::vector<std::vector<std::pair<int, int>>> adj(nb);  // (neighbor, line)
  for (std::size_t e = 0; e < nl; ++e) {
    if (!in_service[e]) continue;
    adj[from[e]].push_back({to[e], static_cast<int>(e)});
    adj[to[e]].push_back({from[e], static_cast<int>(e)});
  }
  int n_islands = 0;
  for (std::size_t start = 0; start < nb; ++start) {
    if (sol.island_of[start] >= 0) continue;
    const int isl = n_islands++;
    std::deque<int> queue{static_cast<int>(start)};
    sol.island_of[start] = isl;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (auto [v, e] : adj[u])
        if (sol.island_of[v] < 0) {
          sol.island_of[v] = isl;
          queue.push_back(v);
        }
    }
  }

  std::vector<std::vector<int>> island_buses(n_islands);
  for (std::size_t b = 0; b < nb; ++b) island_buses[sol.island_of[b]].push_back(static_cast<int>(b));

  sol.island_served.assign(n_islands, 0.0);

  for (int isl = 0; isl < n_islands; ++isl) {
    const std::vector<int>& members = island_buses[isl];
    double load = 0.0, gen = 0.0;
    for (int b : members) {
      load += net.buses[b].load;
      gen += net.buses[b].gen;
    }
    if (gen <= 0.0 || load <= 0.0) {
      // nothing deliverable: stranded load is shed, stranded generation idles
      sol.shed += load;
      continue;
    }
    const double gen_scale = gen > load ? load / gen : 1.0;
    const double load_scale = gen < load ? gen / load : 1.0;
    const double served = load * load_scale;

    if (members.size() > 1) {
      // local angle solve: Laplacian in 1/x weights, slack row/col removed
      std::unordered_map<int, int> local;
      local.reserve(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);

      int slack = -1;  // lowest bus id with nonzero generation
      for (int b : members)
        if (net.buses[b].gen > 0.0 && (slack < 0 || net.buses[b].id < net.buses[slack].id)) slack = b;

      const int n = static_cast<int>(members.size());
      Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd inj(n);
      for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses[members[i]];
        inj[i] = b.gen * gen_scale - b.load * load_scale;
      }
      for (std::size_t e = 0; e < nl; ++e) {
        if (!in_service[e] || sol.island_of[from[e]] != isl) continue;
        const double w = 1.0 / net.lines[e].reactance;
        const int i = local[from[e]], j = local[to[e]];
        lap(i, i) += w;
        lap(j, j) += w;
        lap(i, j) -= w;
        lap(j, i) -= w;
      }
      const int s = local[slack];
      // drop slack row/col by moving it to the end and shrinking
      lap.row(s).swap(lap.row(n - 1));
      lap.col(s).swap(lap.col(n - 1));
      std::swap(inj[s], inj[n - 1]);
      Eigen::MatrixXd reduced = lap.topLeftCorner(n - 1, n - 1);
      Eigen::VectorXd rhs = inj.head(n - 1);
      Eigen::LDLT<Eigen::MatrixXd> solver(reduced);
      Eigen::VectorXd theta_red;
      bool ok = solver.info() == Eigen::Success;
      if (ok) {
        theta_red = solver.solve(rhs);
        ok = (reduced * theta_red - rhs).cwiseAbs().maxCoeff() <= 1e-6;
      }
      if (!ok) {
        log_warn("degenerate island admittance; island fully shed");
        sol.degenerate = true;
        sol.shed += load;
        continue;
      }
      // undo the swap: angles in member order, slack angle = 0
      Eigen::VectorXd theta(n);
      for (int i = 0; i < n - 1; ++i) theta[i] = theta_red[i];
      theta[n - 1] = 0.0;
      std::swap(theta[s], theta[n - 1]);

      for (std::size_t e = 0; e < nl; ++e) {
        if (!in_service[e] || sol.island_of[from[e]] != isl) continue;
        sol.flow[e] = (theta[local[from[e]]] - theta[local[to[e]]]) / net.lines[e].reactance;
      }
    }

    sol.island_served[isl] = served;
    sol.shed += load - served;
  }
  return sol;
}

FlowSolution dc_power_flow(const Network& net, const std::set<int>& outaged_ids) {
  std::vector<std::uint8_t> in_service(net.lines.size(), 1);
  for (int id : outaged_ids) in_service[net.line_pos(id)] = 0;
  return dc_power_flow(net, in_service);
}

}  // namespace tsso
