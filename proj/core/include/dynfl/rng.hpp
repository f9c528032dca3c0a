#pragma once

// Counter-based random primitives. Every random quantity used by the
// rounding pipeline is a pure function of (seed, stream tag, entity index),
// so a trial can be replayed from its seed alone and trials can run in
// parallel without shared generator state.

#include <cmath>
#include <cstdint>

namespace dynfl::rng {

inline constexpr std::uint64_t kFacilityStream = 0x66616369'6c697479ull;
inline constexpr std::uint64_t kClientStream = 0x636c6965'6e742e2eull;

// SplitMix64 output function.
inline std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Uniform in the open interval (0,1): 53 mantissa bits, offset by half an ulp
// so 0 and 1 are unreachable.
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Deterministic uniform (0,1) draw for entity `index` on a named stream.
inline double unit_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = split_mix(split_mix(split_mix(seed) ^ stream) + index);
  return unit_open(h);
}

/// Inverse CDF of the exponential distribution: u in (0,1), rate > 0.
inline double clock_from_uniform(double u, double rate) {
  return -std::log(u) / rate;
}

}  // namespace dynfl::rng
