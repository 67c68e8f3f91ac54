#pragma once

#include <cstdint>
#include <random>

namespace dnp::rng {

/// SplitMix64 mixing step. Used to derive independent, order-insensitive
/// per-task seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the stream for task `index` under `master`. Stateless, so a
/// parallel executor derives identical streams in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) with fully specified bit use (53-bit mantissa).
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace dnp::rng
