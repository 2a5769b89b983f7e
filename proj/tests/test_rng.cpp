#include "doctest.h"

#include <cstdint>
#include <set>

#include "tsso/rng.hpp"

using namespace tsso;

TEST_CASE("splitmix64 matches the reference sequence") {
  // First three outputs of the canonical splitmix64 for seed 1234567,
  // computed independently from the published reference code.
  SplitMix64 rng(1234567);
  CHECK(rng.next() == UINT64_C(6457827717110365317));
  CHECK(rng.next() == UINT64_C(3203168211198807973));
  CHECK(rng.next() == UINT64_C(9817491932198370423));
}

TEST_CASE("uniform stays in [0, 1) and index stays in range") {
  SplitMix64 rng(42);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.index(7) < 7);
  }
}

TEST_CASE("mix_key separates streams and stays deterministic") {
  CHECK(mix_key(1, 2, 3) == mix_key(1, 2, 3));
  std::set<std::uint64_t> keys;
  for (std::uint64_t a = 0; a < 8; ++a) {
    for (std::uint64_t b = 0; b < 8; ++b) {
      keys.insert(mix_key(a, b));
    }
  }
  CHECK(keys.size() == 64);  // no collisions on a small grid
}

TEST_CASE("identical seeds give identical streams") {
  SplitMix64 a(987), b(987);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}
