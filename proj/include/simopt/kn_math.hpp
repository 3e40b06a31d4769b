#pragma once

#include <cstddef>
#include <span>

namespace simopt {

struct KnConstants {
  double eta = 0.0;
  double h2 = 0.0;
};

/// eta = 0.5 * ((2p / (N-1))^(-2/(R0-1)) - 1), h^2 = 2 eta (R0-1).
/// Throws ConfigError for N < 2, R0 < 2 or p outside (0,1).
KnConstants kn_constants(std::size_t n_solutions, std::size_t r0, double p);

/// Sample variance of the paired differences a_j - b_j.
/// Throws std::invalid_argument on length mismatch or fewer than 2 pairs.
double pairwise_variance(std::span<const double> a, std::span<const double> b);

/// Unchecked core of pairwise_variance, shared by the kernels.
double paired_difference_variance(const double* a, const double* b, std::size_t n) noexcept;

/// G(k) = max(0, delta/(2k) * (h2*s2/delta^2 - k)).
constexpr double continuation_bound(double k, double delta, double h2, double s2) noexcept {
  const double g = delta / (2.0 * k) * (h2 * s2 / (delta * delta) - k);
  return g > 0.0 ? g : 0.0;
}

}  // namespace simopt
