#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace helios::rng {

// Distribution helpers on top of std::mt19937_64. The standard library's
// distribution objects are implementation-defined, so seeded artifacts would
// not be portable across standard libraries; these draws are pinned.

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + uniform01(gen) * (hi - lo);
}

/// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = gen();
    if (x >= threshold) return x % n;
  }
}

/// Standard normal draw, Box-Muller. The second variate of the pair is
/// discarded so the stream position stays predictable.
inline double gaussian(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  while (u1 <= 0.0) u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace helios::rng
