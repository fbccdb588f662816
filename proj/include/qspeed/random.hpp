#pragma once

// Keyed random streams: every trial, restart or instance draws from a stream
// derived from (seed, index), so results never depend on evaluation order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "matcore.hpp"

namespace qspeed {

/// splitmix64 output function.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: output n is mix64(key + n * golden), key = mix(seed, index).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class KeyedRng {
 public:
  using result_type = std::uint64_t;

  KeyedRng(std::uint64_t seed, std::uint64_t index) noexcept
      : key_(mix64(mix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  /// Uniform in the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    std::normal_distribution<double> d;
    return d(*this);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Complex Ginibre matrix: i.i.d. entries with independent standard normal real and imaginary parts.
inline ComplexMatrix ginibre(Index rows, Index cols, KeyedRng& rng) {
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cplx(re, im);
    }
  }
  return g;
}

}  // namespace qspeed
