#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "simopt/errors.hpp"
#include "simopt/kn.hpp"
#include "simopt/objective.hpp"
#include "simopt/space.hpp"

namespace simopt {

/// Observations per visited solution at iteration k.
using AllocSchedule = std::function<std::uint64_t(std::uint64_t)>;

/// max(1, min(5, ceil(5 * (ln k)^1.01))).
std::uint64_t ah_alloc_default(std::uint64_t k);

struct AhConfig {
  std::size_t m = 3;
  AllocSchedule alloc = ah_alloc_default;
  std::uint64_t budget = 0;
  std::optional<Solution> initial;
  Execution exec = Execution::parallel;
  /// Optional KN clean-up over the last B_k, paid from `cleanup_budget`
  /// (0 means 20% of the budget).
  bool cleanup_kn = false;
  KnConfig cleanup;
  std::uint64_t cleanup_budget = 0;
};

/// Inclusive index interval on one axis.
struct AxisInterval {
  std::size_t lower = 0;
  std::size_t upper = 0;

  friend bool operator==(const AxisInterval&, const AxisInterval&) = default;
};

using Hyperbox = std::vector<AxisInterval>;

/// Per axis, the tightest visited coordinates strictly below and above the
/// incumbent's, or the axis ends when none exist.
Hyperbox hyperbox_bounds(std::span<const Solution> visited, const Solution& incumbent, const SearchSpace& space);

std::uint64_t hyperbox_volume(const Hyperbox& box);
bool in_box(const Hyperbox& box, const Solution& x);

/// Up to m distinct solutions drawn uniformly from the box minus the incumbent.
std::vector<Solution> sample_mpa(const Hyperbox& box, const SearchSpace& space, std::size_t m,
                                 const Solution& incumbent, Rng& rng);

struct AhVisit {
  std::uint64_t count = 0;
  double sum = 0.0;

  double mean() const noexcept { return sum / static_cast<double>(count); }
};

struct AhIteration {
  std::uint64_t k = 0;
  Hyperbox box;
  std::vector<Solution> sampled;
  std::uint64_t alloc = 0;
  Solution incumbent;
  double incumbent_mean = 0.0;
  /// Cumulative evaluations after this iteration.
  std::uint64_t evaluations = 0;
};

struct AhResult {
  Solution initial;
  Solution incumbent;
  double incumbent_mean = 0.0;
  std::map<SolutionId, AhVisit> visited;
  std::vector<AhIteration> iterations;
  std::uint64_t evaluations_used = 0;
  std::optional<KnOutcome> cleanup;
  /// Incumbent, or the clean-up winner when clean-up ran.
  Solution answer;
};

using AhAborted = SolverAborted<AhResult>;

void validate(const AhConfig& config, const SearchSpace& space);

AhResult run_ah(ObjectiveHandle& handle, const AhConfig& config, const SeedPolicy& seeds);

}  // namespace simopt
