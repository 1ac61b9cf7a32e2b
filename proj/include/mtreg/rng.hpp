#pragma once

#include <cstdint>
#include <random>

namespace mtreg::rng {

// splitmix64 finalizer. Good avalanche, cheap, and stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of substream `index` from a master seed. Replications,
// product-observable parts and optimizer starts each get their own substream
// so results do not depend on evaluation order or worker count.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 1));
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace mtreg::rng
