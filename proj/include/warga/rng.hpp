#pragma once

#include <cmath>
#include <cstdint>

#include "warga/types.hpp"

namespace warga {

// Counter-based splitmix64 generator. The whole state is one 64-bit word, so
// an identical seed yields an identical stream on every run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53 bits of mantissa.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller, cosine branch; consumes two uniforms.
  double normal() {
    constexpr double kTwoPi = 6.28318530717958647692;
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Unbiased draw from [0, n) (Lemire reduction with rejection).
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t x = next_u64();
      __uint128_t wide = static_cast<__uint128_t>(x) * n;
      if (static_cast<std::uint64_t>(wide) >= threshold)
        return static_cast<std::uint64_t>(wide >> 64);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace warga
