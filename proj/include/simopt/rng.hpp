#pragma once

#include <cstdint>
#include <array>

namespace simopt {

/// SplitMix64 finalizer; used to mix seeds and expand state.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** seeded directly from a 64-bit seed through SplitMix64.
///
/// Every stochastic decision in the library is drawn from this generator so
/// that results are portable across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }
  std::uint64_t next() noexcept;

  /// Uniform on (0, 1]; never returns 0 so ceil(u * m) is always >= 1.
  double uniform_open0() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [a, b).
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }
  /// Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace simopt
