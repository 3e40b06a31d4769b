#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "simopt/errors.hpp"
#include "simopt/kn_math.hpp"
#include "simopt/objective.hpp"

namespace simopt {

struct KnConfig {
  std::size_t r0 = 10;
  double delta = 0.05;
  double p = 0.05;
  /// When set, run in budget-constrained mode and possibly return several survivors.
  std::optional<std::uint64_t> budget;
  Execution exec = Execution::parallel;
};

enum class KnMode { completed, budget_exhausted };

struct KnSurvivor {
  SolutionId id = 0;
  double mean = 0.0;
  std::uint64_t count = 0;
};

struct KnOutcome {
  KnMode mode = KnMode::completed;
  std::optional<SolutionId> winner;
  /// Final survivor set D, sorted by id.
  std::vector<KnSurvivor> survivors;
  std::uint64_t evaluations_used = 0;
  /// Replications per survivor at termination (k).
  std::uint64_t iterations = 0;
  KnConstants constants;
  /// |D| after each screening pass, starting with the pass at k = R0.
  std::vector<std::size_t> survivor_counts;
  /// True when the winner came from the max-mean rule after every
  /// continuation bound reached zero with exact ties left.
  bool tie_break = false;
};

using KnAborted = SolverAborted<KnOutcome>;

/// Highest-mean survivor (lowest id on ties).
const KnSurvivor& best_survivor(const KnOutcome& outcome);

/// KN over every solution of the handle's space.
KnOutcome run_kn(ObjectiveHandle& handle, const KnConfig& config, const SeedPolicy& seeds);

/// KN over an explicit candidate set (e.g. the final AH visit set).
KnOutcome run_kn_on(ObjectiveHandle& handle, std::span<const SolutionId> candidates, const KnConfig& config,
                    const SeedPolicy& seeds);

void validate(const KnConfig& config);

}  // namespace simopt
