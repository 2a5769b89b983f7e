#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tsso/grid.hpp"
#include "tsso/risk_params.hpp"
#include "tsso/rng.hpp"

namespace tsso {

// One failure generation. Line references are positions into Network::lines
// (the database is tied to one network file via fingerprint).
struct GenerationRecord {
  std::vector<int> failed_now;  // lines that failed in this generation, ascending
  std::vector<int> failed_cum;  // all failed lines so far, ascending
  std::vector<double> flow;     // per-line flows after the failures, MW (0 for failed)
};

struct FailureChain {
  static constexpr int kNeverFails = std::numeric_limits<std::int32_t>::max();

  int state = 0;  // l
  int id = 0;     // k within the state's sub-database
  std::vector<double> base_flow;          // pre-event flows (generation 1 sees these)
  std::vector<GenerationRecord> records;  // record 0 = initiating event
  double load_loss = 0.0;                 // Y, MW
  std::vector<int> first_failure;         // per line: 1-based generation, or kNeverFails

  int depth() const { return static_cast<int>(records.size()); }  // d

  // flows feeding generation i's failure probabilities, i in [1, depth()]
  const std::vector<double>& flows_before(int generation) const {
    return generation <= 1 ? base_flow : records[generation - 2].flow;
  }
};

enum class Initiation { Sampled, Exhaustive };

struct SimulationOptions {
  int d_max = 20;                                // generation cap, initiating event included
  Initiation initiation = Initiation::Sampled;   // Sampled: one line drawn proportional to its
                                                 // overload probability; Exhaustive: chain k seeds
                                                 // line (k mod n_lines)
};

struct ChainDatabase {
  std::uint32_t version = 1;
  std::uint64_t seed = 0;
  std::uint64_t network_fp = 0;
  std::uint64_t params_fp = 0;
  int n_lines = 0;
  std::vector<std::vector<FailureChain>> states;  // M^l per system state

  std::size_t total_chains() const {
    std::size_t n = 0;
    for (const auto& s : states) n += s.size();
    return n;
  }
};

struct DatabaseLoad {
  ChainDatabase db;
  std::vector<std::string> warnings;  // fingerprint mismatches etc. (non-fatal)
};

// Content hashes used to tie a database to its inputs. The params fingerprint
// covers only what sampling depends on (overload-curve constants and the
// simulation options); DTR factors are applied afterwards by reweighting.
std::uint64_t network_fingerprint(const Network& net);
std::uint64_t sampling_fingerprint(const RiskParams& params, const SimulationOptions& opt);

// Simulates one cascading-failure chain under the given system state. The
// initiating outage is generation 1; each later generation fails surviving
// lines independently at current-flow probabilities, recomputing flows after
// every generation, until a generation adds nothing or d_max is reached.
// DTR never enters here: chains are sampled on the unimproved system and
// re-weighted later.
FailureChain simulate_chain(const Network& net, const SystemState& state,
                            const RiskParams& params, SplitMix64& rng,
                            const SimulationOptions& opt = {});

// chain_index seeds the per-chain RNG stream and the exhaustive initiation
// rotation; pass the chain's position in its sub-database.
FailureChain simulate_chain_in_state(const Network& applied, int state_index, int chain_index,
                                     std::uint64_t seed, const RiskParams& params,
                                     const SimulationOptions& opt);

ChainDatabase build_database(const Network& net, const std::vector<SystemState>& states,
                             int chains_per_state, const RiskParams& params, std::uint64_t seed,
                             const SimulationOptions& opt = {}, int threads = 1);

// Binary container: 8-byte magic, little-endian u64 header length, JSON header
// (version/seed/fingerprints/counts), then fixed-layout chain records (see
// README). Roundtrips are bit-identical.
void persist_database(const ChainDatabase& db, const std::string& path);
DatabaseLoad load_database(const std::string& path, const Network* expected_network = nullptr,
                           const std::uint64_t* expected_params_fp = nullptr);

}  // namespace tsso
