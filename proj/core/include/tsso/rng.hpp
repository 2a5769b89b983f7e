#pragma once

#include <cstddef>
#include <cstdint>

namespace tsso {

// Counter-based SplitMix64. Small, fast, and — crucially — cheap to re-key,
// so every (seed, state, chain) triple gets its own stream and simulation
// results are identical no matter how work is split across threads.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform index in [0, n); n must be > 0
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

private:
  std::uint64_t state_;
};

// Collapse up to three identifying integers into one well-mixed stream key.
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace tsso
