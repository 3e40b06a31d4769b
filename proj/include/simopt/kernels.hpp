#pragma once

// Data-parallel kernels. Each has a serial reference and an OpenMP version
// that must produce bit-identical results; tests and the benchmark compare
// the two.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "simopt/objective.hpp"

namespace simopt {

/// Symmetric matrix with zero diagonal, stored as the strict upper triangle.
class PackedSymmetric {
 public:
  PackedSymmetric() = default;
  explicit PackedSymmetric(std::size_t n) : n_(n), data_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double at(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    return data_[offset(i, j)];
  }
  void set(std::size_t i, std::size_t j, double v) noexcept { data_[offset(i, j)] = v; }
  const std::vector<double>& raw() const noexcept { return data_; }

 private:
  std::size_t offset(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_ = 0;
  std::vector<double> data_;
};

namespace kernels {

// Batch evaluation --------------------------------------------------------

void evaluate_serial(const ObjectiveHandle& handle, std::span<const EvalRequest> requests,
                     std::uint64_t first_index, std::span<Observation> out);
void evaluate_parallel(const ObjectiveHandle& handle, std::span<const EvalRequest> requests,
                       std::uint64_t first_index, std::span<Observation> out);

// KN ----------------------------------------------------------------------

/// samples is row-major, one row of `reps` values per solution.
PackedSymmetric pairwise_variance_serial(std::span<const double> samples, std::size_t n_solutions,
                                         std::size_t reps);
PackedSymmetric pairwise_variance_parallel(std::span<const double> samples, std::size_t n_solutions,
                                           std::size_t reps);

/// Keeps survivor positions n with mean[n] >= mean[l] - G_nl(k) for every
/// other survivor l. `survivors` holds row positions into means/s2.
std::vector<std::size_t> screen_serial(std::span<const std::size_t> survivors, std::span<const double> means,
                                       const PackedSymmetric& s2, double k, double delta, double h2);
std::vector<std::size_t> screen_parallel(std::span<const std::size_t> survivors, std::span<const double> means,
                                         const PackedSymmetric& s2, double k, double delta, double h2);

// Independent trials ------------------------------------------------------

template <typename Result, typename Fn>
std::vector<Result> run_trials_serial(std::size_t n, Fn&& fn) {
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
  return out;
}

/// Runs fn(i) for i in [0, n) across threads; results in index order. The
/// first failing index (lowest i) rethrows after the loop.
template <typename Result, typename Fn>
std::vector<Result> run_trials_parallel(std::size_t n, Fn&& fn) {
  std::vector<Result> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <typename Result, typename Fn>
std::vector<Result> run_trials(std::size_t n, Execution exec, Fn&& fn) {
  return exec == Execution::parallel ? run_trials_parallel<Result>(n, std::forward<Fn>(fn))
                                     : run_trials_serial<Result>(n, std::forward<Fn>(fn));
}

}  // namespace kernels
}  // namespace simopt
