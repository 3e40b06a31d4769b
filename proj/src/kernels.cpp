#include "simopt/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "simopt/errors.hpp"
#include "simopt/kn_math.hpp"

namespace simopt {

double paired_difference_variance(const double* a, const double* b, std::size_t n) noexcept {
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += a[j] - b[j];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = a[j] - b[j] - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

namespace kernels {

void evaluate_serial(const ObjectiveHandle& handle, std::span<const EvalRequest> requests,
                     std::uint64_t first_index, std::span<Observation> out) {
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out[i] = handle.evaluate_unrecorded(requests[i], first_index + i);
  }
}

void evaluate_parallel(const ObjectiveHandle& handle, std::span<const EvalRequest> requests,
                       std::uint64_t first_index, std::span<Observation> out) {
  const auto n = static_cast<long long>(requests.size());
  std::vector<std::exception_ptr> errors(requests.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out[idx] = handle.evaluate_unrecorded(requests[idx], first_index + idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PackedSymmetric pairwise_variance_serial(std::span<const double> samples, std::size_t n_solutions,
                                         std::size_t reps) {
  if (samples.size() != n_solutions * reps || reps < 2) {
    throw std::invalid_argument("pairwise_variance: sample matrix shape mismatch");
  }
  PackedSymmetric s2(n_solutions);
  for (std::size_t i = 0; i < n_solutions; ++i) {
    for (std::size_t j = i + 1; j < n_solutions; ++j) {
      s2.set(i, j, paired_difference_variance(&samples[i * reps], &samples[j * reps], reps));
    }
  }
  return s2;
}

PackedSymmetric pairwise_variance_parallel(std::span<const double> samples, std::size_t n_solutions,
                                           std::size_t reps) {
  if (samples.size() != n_solutions * reps || reps < 2) {
    throw std::invalid_argument("pairwise_variance: sample matrix shape mismatch");
  }
  PackedSymmetric s2(n_solutions);
  const auto n = static_cast<long long>(n_solutions);
  // Rows shrink with i, so dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 16)
  for (long long ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < n_solutions; ++j) {
      s2.set(i, j, paired_difference_variance(&samples[i * reps], &samples[j * reps], reps));
    }
  }
  return s2;
}

namespace {
bool survives(std::size_t n, std::span<const std::size_t> survivors, std::span<const double> means,
              const PackedSymmetric& s2, double k, double delta, double h2) noexcept {
  for (std::size_t l : survivors) {
    if (l == n) continue;
    if (!(means[n] >= means[l] - continuation_bound(k, delta, h2, s2.at(n, l)))) return false;
  }
  return true;
}
}  // namespace

std::vector<std::size_t> screen_serial(std::span<const std::size_t> survivors, std::span<const double> means,
                                       const PackedSymmetric& s2, double k, double delta, double h2) {
  std::vector<std::size_t> kept;
  for (std::size_t n : survivors) {
    if (survives(n, survivors, means, s2, k, delta, h2)) kept.push_back(n);
  }
  return kept;
}

std::vector<std::size_t> screen_parallel(std::span<const std::size_t> survivors, std::span<const double> means,
                                         const PackedSymmetric& s2, double k, double delta, double h2) {
  std::vector<char> keep(survivors.size(), 0);
  const auto count = static_cast<long long>(survivors.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    keep[idx] = survives(survivors[idx], survivors, means, s2, k, delta, h2) ? 1 : 0;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (keep[i]) kept.push_back(survivors[i]);
  }
  return kept;
}

}  // namespace kernels
}  // namespace simopt
