#pragma once

#include <cstdint>

namespace ricci {

// Counter-based generator: sample i of a stream keyed by `seed` is a pure
// function of (seed, i), so parallel loops draw identical values regardless
// of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t rng_at(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0) {
  return splitmix64(splitmix64(seed ^ (0xa0761d6478bd642fULL * (lane + 1))) + index);
}

// Uniform in [0,1).
inline double u01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [a,b).
inline double uniform(std::uint64_t bits, double a, double b) {
  return a + (b - a) * u01(bits);
}

}  // namespace ricci
