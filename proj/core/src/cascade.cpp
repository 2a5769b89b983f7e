#include "tsso/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tsso/errors.hpp"
#include "tsso/log.hpp"

namespace tsso {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'S', 'S', 'O', 'C', 'H', 'D', 'B'};
constexpr std::uint32_t kFormatVersion = 1;

// FNV-1a over a canonical byte stream: order-sensitive, platform-stable.
struct Fnv64 {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i32(int v) { u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
};

}  // namespace

std::uint64_t network_fingerprint(const Network& net) {
  Fnv64 f;
  f.i32(static_cast<int>(net.buses.size()));
  for (const Bus& b : net.buses) {
    f.i32(b.id);
    f.f64(b.load);
    f.f64(b.gen);
    f.f64(b.gen_max);
  }
  f.i32(static_cast<int>(net.lines.size()));
  for (const Line& l : net.lines) {
    f.i32(l.id);
    f.i32(l.from);
    f.i32(l.to);
    f.f64(l.reactance);
    f.f64(l.p_max);
    f.f64(l.p_min);
  }
  f.i32(net.slack_bus);
  return f.h;
}

std::uint64_t sampling_fingerprint(const RiskParams& params, const SimulationOptions& opt) {
  Fnv64 f;
  f.f64(params.pr_min);
  f.f64(params.pr_max);
  f.f64(params.mu);
  f.i32(opt.d_max);
  f.i32(opt.initiation == Initiation::Exhaustive ? 1 : 0);
  return f.h;
}

namespace {

FailureChain run_chain(const Network& applied, int state_index, int chain_index,
                       SplitMix64& rng, const RiskParams& params, const SimulationOptions& opt) {
  const std::size_t nl = applied.lines.size();
  FailureChain chain;
  chain.state = state_index;
  chain.id = chain_index;
  chain.first_failure.assign(nl, FailureChain::kNeverFails);

  std::vector<std::uint8_t> in_service(nl, 1);
  FlowSolution sol = dc_power_flow(applied, in_service);
  chain.base_flow = sol.flow;

  // generation 1: a single initiating outage
  std::size_t seed_line;
  if (opt.initiation == Initiation::Exhaustive) {
    seed_line = static_cast<std::size_t>(chain_index) % nl;
  } else {
    // draw proportional to the overload probabilities at base flows
    std::vector<double> cum(nl);
    double total = 0.0;
    for (std::size_t e = 0; e < nl; ++e) {
      total += failure_probability(sol.flow[e], applied.lines[e], params, false);
      cum[e] = total;
    }
    const double target = rng.uniform() * total;
    seed_line = std::lower_bound(cum.begin(), cum.end(), target) - cum.begin();
    if (seed_line >= nl) seed_line = nl - 1;
  }

  std::vector<int> cumulative;
  auto apply_failures = [&](std::vector<int> newly) {
    for (int e : newly) in_service[e] = 0;
    cumulative.insert(cumulative.end(), newly.begin(), newly.end());
    std::sort(cumulative.begin(), cumulative.end());
    sol = dc_power_flow(applied, in_service);
    GenerationRecord rec;
    rec.failed_now = std::move(newly);
    rec.failed_cum = cumulative;
    rec.flow = sol.flow;
    for (int e : rec.failed_now) chain.first_failure[e] = chain.depth() + 1;
    chain.records.push_back(std::move(rec));
  };

  apply_failures({static_cast<int>(seed_line)});

  while (chain.depth() < opt.d_max) {
    const std::vector<double>& flow = chain.records.back().flow;
    std::vector<int> newly;
    for (std::size_t e = 0; e < nl; ++e) {
      if (!in_service[e]) continue;
      const double phi = failure_probability(flow[e], applied.lines[e], params, false);
      if (rng.uniform() < phi) newly.push_back(static_cast<int>(e));
    }
    if (newly.empty()) break;
    apply_failures(std::move(newly));
  }

  chain.load_loss = sol.shed;
  return chain;
}

}  // namespace

FailureChain simulate_chain(const Network& net, const SystemState& state,
                            const RiskParams& params, SplitMix64& rng,
                            const SimulationOptions& opt) {
  validate(params);
  const Network applied = apply_state(net, state);
  return run_chain(applied, state.index, 0, rng, params, opt);
}

FailureChain simulate_chain_in_state(const Network& applied, int state_index, int chain_index,
                                     std::uint64_t seed, const RiskParams& params,
                                     const SimulationOptions& opt) {
  SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(state_index),
                         static_cast<std::uint64_t>(chain_index)));
  return run_chain(applied, state_index, chain_index, rng, params, opt);
}

ChainDatabase build_database(const Network& net, const std::vector<SystemState>& states,
                             int chains_per_state, const RiskParams& params, std::uint64_t seed,
                             const SimulationOptions& opt, int threads) {
  validate(params);
  if (states.empty()) throw ConfigError("build_database: no system states");
  if (chains_per_state < 1) throw ConfigError("build_database: chains_per_state must be >= 1");
  if (opt.d_max < 1) throw ConfigError("build_database: d_max must be >= 1");

  ChainDatabase db;
  db.version = kFormatVersion;
  db.seed = seed;
  db.network_fp = network_fingerprint(net);
  db.params_fp = sampling_fingerprint(params, opt);
  db.n_lines = static_cast<int>(net.lines.size());
  db.states.resize(states.size());

  const int workers = std::max(1, threads);
  for (std::size_t l = 0; l < states.size(); ++l) {
    const Network applied = apply_state(net, states[l]);
    std::vector<FailureChain>& chains = db.states[l];
    chains.resize(chains_per_state);
    auto worker = [&](int first, int last) {
      for (int k = first; k < last; ++k)
        chains[k] = simulate_chain_in_state(applied, static_cast<int>(l), k, seed, params, opt);
    };
    if (workers == 1) {
      worker(0, chains_per_state);
    } else {
      std::vector<std::thread> pool;
      const int step = (chains_per_state + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const int first = w * step;
        const int last = std::min(chains_per_state, first + step);
        if (first < last) pool.emplace_back(worker, first, last);
      }
      for (auto& t : pool) t.join();
    }
  }
  return db;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
  Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string take(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

private:
  unsigned char byte() { return static_cast<unsigned char>(data_[pos_++]); }
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw IoError("truncated chain database: " + path_);
  }
  const std::string& data_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void persist_database(const ChainDatabase& db, const std::string& path) {
  json header;
  header["version"] = db.version;
  header["seed"] = db.seed;
  header["network_fp"] = db.network_fp;
  header["params_fp"] = db.params_fp;
  header["n_lines"] = db.n_lines;
  json counts = json::array();
  for (const auto& s : db.states) counts.push_back(s.size());
  header["chains_per_state"] = counts;
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u64(out, header_text.size());
  out += header_text;

  for (const auto& sub : db.states) {
    for (const FailureChain& ch : sub) {
      put_u32(out, static_cast<std::uint32_t>(ch.state));
      put_u32(out, static_cast<std::uint32_t>(ch.id));
      put_f64(out, ch.load_loss);
      put_u32(out, static_cast<std::uint32_t>(ch.records.size()));
      for (double v : ch.base_flow) put_f64(out, v);
      for (const GenerationRecord& rec : ch.records) {
        put_u32(out, static_cast<std::uint32_t>(rec.failed_now.size()));
        for (int e : rec.failed_now) put_u32(out, static_cast<std::uint32_t>(e));
        for (double v : rec.flow) put_f64(out, v);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open database file for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

DatabaseLoad load_database(const std::string& path, const Network* expected_network,
                           const std::uint64_t* expected_params_fp) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open database file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string data = buf.str();

  Reader r(data, path);
  if (r.take(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
    throw IoError("not a chain database file: " + path);
  const std::uint64_t header_len = r.u64();
  json header;
  try {
    header = json::parse(r.take(header_len));
  } catch (const json::parse_error& e) {
    throw IoError("corrupt database header in " + path + ": " + e.what());
  }

  DatabaseLoad out;
  ChainDatabase& db = out.db;
  db.version = header.at("version").get<std::uint32_t>();
  if (db.version != kFormatVersion)
    throw IoError("unsupported chain database version " + std::to_string(db.version) +
                  " in " + path + " (expected " + std::to_string(kFormatVersion) + ")");
  db.seed = header.at("seed").get<std::uint64_t>();
  db.network_fp = header.at("network_fp").get<std::uint64_t>();
  db.params_fp = header.at("params_fp").get<std::uint64_t>();
  db.n_lines = header.at("n_lines").get<int>();
  if (db.n_lines <= 0 || db.n_lines > 4096) throw IoError("implausible line count in " + path);
  const std::vector<std::size_t> counts = header.at("chains_per_state").get<std::vector<std::size_t>>();

  if (expected_network) {
    if (static_cast<int>(expected_network->lines.size()) != db.n_lines)
      throw IoError("database " + path + " was built for a network with " +
                    std::to_string(db.n_lines) + " lines, got " +
                    std::to_string(expected_network->lines.size()));
    const std::uint64_t fp = network_fingerprint(*expected_network);
    if (fp != db.network_fp) {
      std::string w = "network fingerprint mismatch: database " + path +
                      " was built from different network data; reweighting identities still "
                      "hold but risks refer to the original network";
      log_warn(w);
      out.warnings.push_back(std::move(w));
    }
  }
  if (expected_params_fp && *expected_params_fp != db.params_fp) {
    std::string w = "sampling-parameter fingerprint mismatch for database " + path;
    log_warn(w);
    out.warnings.push_back(std::move(w));
  }

  db.states.resize(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l) {
    db.states[l].resize(counts[l]);
    for (std::size_t k = 0; k < counts[l]; ++k) {
      FailureChain ch;
      ch.state = static_cast<int>(r.u32());
      ch.id = static_cast<int>(r.u32());
      if (ch.state != static_cast<int>(l))
        throw IoError("chain/state index mismatch in " + path);
      ch.load_loss = r.f64();
      const std::uint32_t depth = r.u32();
      if (depth == 0) throw IoError("empty chain record in " + path);
      ch.base_flow.resize(db.n_lines);
      for (int e = 0; e < db.n_lines; ++e) ch.base_flow[e] = r.f64();
      ch.first_failure.assign(db.n_lines, FailureChain::kNeverFails);
      std::vector<int> cumulative;
      for (std::uint32_t g = 0; g < depth; ++g) {
        GenerationRecord rec;
        const std::uint32_t n_new = r.u32();
        rec.failed_now.resize(n_new);
        for (std::uint32_t i = 0; i < n_new; ++i) {
          const std::uint32_t e = r.u32();
          if (e >= static_cast<std::uint32_t>(db.n_lines))
            throw IoError("line index out of range in " + path);
          rec.failed_now[i] = static_cast<int>(e);
          if (ch.first_failure[e] != FailureChain::kNeverFails)
            throw IoError("line fails twice within a chain in " + path);
          ch.first_failure[e] = static_cast<int>(g) + 1;
        }
        cumulative.insert(cumulative.end(), rec.failed_now.begin(), rec.failed_now.end());
        std::sort(cumulative.begin(), cumulative.end());
        rec.failed_cum = cumulative;
        rec.flow.resize(db.n_lines);
        for (int e = 0; e < db.n_lines; ++e) rec.flow[e] = r.f64();
        ch.records.push_back(std::move(rec));
      }
      db.states[l][k] = std::move(ch);
    }
  }
  if (!r.done()) throw IoError("trailing bytes in chain database: " + path);
  return out;
}

}  // namespace tsso
