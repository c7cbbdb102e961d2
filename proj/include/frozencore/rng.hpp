#pragma once

#include <cstdint>

#include "frozencore/types.hpp"

namespace frozencore {

// Counter-based draws: every value is a pure function of (seed, key), so
// realizations do not depend on iteration order or on thread partitioning.

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v));
}

inline std::uint64_t hash_site(std::uint64_t seed, const IntVec3 &n) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, static_cast<std::uint32_t>(n.x));
  h = hash_combine(h, static_cast<std::uint32_t>(n.y));
  h = hash_combine(h, static_cast<std::uint32_t>(n.z));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits of a hash.
constexpr double to_unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double site_uniform(std::uint64_t seed, const IntVec3 &n) {
  return to_unit_interval(hash_site(seed, n));
}

inline double pair_uniform(std::uint64_t seed, const IntVec3 &a, const IntVec3 &b) {
  return to_unit_interval(hash_combine(hash_site(seed, a), hash_site(seed ^ 0x5bd1e995ULL, b)));
}

} // namespace frozencore
