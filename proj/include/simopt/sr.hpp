#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "simopt/errors.hpp"
#include "simopt/objective.hpp"
#include "simopt/space.hpp"

namespace simopt {

/// Number of ruler tests M_k allowed at stage k; must be nondecreasing.
using MkSchedule = std::function<std::uint64_t(std::uint64_t)>;

/// ceil(ln(k + 10) / ln 5).
std::uint64_t mk_schedule_default(std::uint64_t k);

/// Successes needed out of M tests: ceil(alpha * M), at least 1.
std::uint64_t acceptance_threshold(std::uint64_t tests, double alpha);

struct SrStop {
  /// Optimal-performance stopping: halt as soon as x_k equals this solution.
  std::optional<Solution> target;
  std::optional<std::uint64_t> max_evals;
  std::optional<double> max_wall_seconds;
};

struct SrConfig {
  Bounds ruler{0.0, 1.0};
  /// 1 reproduces the original all-tests-must-pass rule.
  double alpha = 1.0;
  NeighborhoodKind neighborhood = NeighborhoodKind::n2;
  MkSchedule mk = mk_schedule_default;
  /// Random initial solution when empty.
  std::optional<Solution> initial;
  SrStop stop;
};

struct RulerTestResult {
  bool accepted = false;
  std::uint64_t tests = 0;
};

/// Ruler tests over caller-supplied draws: next_h() yields h(z), next_u()
/// yields the ruler sample. A test succeeds iff h > u (ties fail). Stops as
/// soon as the outcome is decided.
template <typename NextH, typename NextU>
RulerTestResult sr_accept_test_with(std::uint64_t tests, double alpha, NextH&& next_h, NextU&& next_u) {
  const std::uint64_t need = acceptance_threshold(tests, alpha);
  const std::uint64_t max_failures = tests - need;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  RulerTestResult result;
  while (result.tests < tests) {
    const double h = next_h();
    const double u = next_u();
    ++result.tests;
    if (h > u) {
      ++successes;
    } else {
      ++failures;
    }
    if (successes >= need) {
      result.accepted = true;
      return result;
    }
    if (failures > max_failures) return result;
  }
  return result;
}

/// One SR acceptance check of candidate z against U(ruler.lower, ruler.upper).
RulerTestResult sr_accept_test(ObjectiveHandle& handle, const Solution& z, Bounds ruler, std::uint64_t tests,
                               double alpha, ReplicationLedger& replications, Rng& ruler_rng);

struct SrStage {
  std::uint64_t k = 0;
  Solution current;
  Solution candidate;
  std::uint64_t tests = 0;
  bool accepted = false;
};

enum class SrStopReason { target_reached, eval_budget, wall_budget };

struct SrTrace {
  std::vector<SrStage> stages;
  Solution initial;
  /// x_k at termination: the method's estimate of the optimum.
  Solution final_solution;
  std::uint64_t evaluations_used = 0;
  std::uint64_t stages_count = 0;
  SrStopReason reason = SrStopReason::eval_budget;
  /// Solution with the highest sample mean among those evaluated.
  std::optional<Solution> best_observed;
  double best_observed_mean = 0.0;
};

using SrAborted = SolverAborted<SrTrace>;

void validate(const SrConfig& config, const SearchSpace& space);

SrTrace run_sr(ObjectiveHandle& handle, const SrConfig& config, const SeedPolicy& seeds);

}  // namespace simopt
