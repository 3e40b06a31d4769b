#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "simopt/rng.hpp"
#include "simopt/space.hpp"

namespace simopt {

// ---------------------------------------------------------------------------
// Seeds

/// Named sub-streams of a master seed. Each solver draws its own decisions
/// from a dedicated stream so objective seeds never alias ruler draws etc.
enum class Stream : std::uint64_t {
  objective = 1,
  initial,
  sr_candidate,
  sr_ruler,
  ah_sample,
  rs_sample,
  reeval,
  trial,
  cleanup,
};

struct SeedPolicy {
  std::uint64_t master_seed = 0;
  /// Seeds are drawn from [1, seed_range]. Zero is treated as 2^64.
  std::uint64_t seed_range = std::uint64_t{1} << 63;

  SeedPolicy child(Stream stream) const noexcept;
  SeedPolicy child(std::uint64_t index) const noexcept;
};

/// Deterministic seed for replication `replication` of solution `solution_id`.
/// Output lies in [1, seed_range].
std::uint64_t derive_seed(const SeedPolicy& policy, std::uint64_t solution_id,
                          std::uint64_t replication) noexcept;

/// Hands out fresh replication indices per solution so that no solution is
/// ever evaluated twice with the same seed within one stream.
class ReplicationLedger {
 public:
  explicit ReplicationLedger(SeedPolicy policy) : policy_(policy) {}

  std::uint64_t next_seed(SolutionId id);
  std::uint64_t count(SolutionId id) const;
  const SeedPolicy& policy() const noexcept { return policy_; }

 private:
  SeedPolicy policy_;
  std::unordered_map<SolutionId, std::uint64_t> next_;
};

// ---------------------------------------------------------------------------
// Evaluation contract

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// A black-box stochastic objective. `sample` must be a pure function of
/// (x, seed). Implementations that are not safe to call concurrently must
/// serialize internally.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Bounds bounds() const = 0;
  virtual std::string name() const = 0;
  virtual double sample(const SearchSpace& space, const Solution& x, std::uint64_t seed) const = 0;
};

struct Observation {
  Solution solution;
  SolutionId solution_id = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t eval_index = 0;
  std::int64_t wall_nanos = 0;
  /// Solver stage / iteration at which the observation was made.
  std::int64_t stage = 0;
};

struct EvalRequest {
  Solution solution;
  std::uint64_t seed = 0;
};

enum class Execution { serial, parallel };

/// Binds an objective to a space and counts evaluations. One handle per
/// solver run; the counter is the only shared mutable state.
class ObjectiveHandle {
 public:
  using Sink = std::function<void(const Observation&)>;

  ObjectiveHandle(std::shared_ptr<const Objective> objective, SearchSpace space);

  const SearchSpace& space() const noexcept { return space_; }
  const Objective& objective() const noexcept { return *objective_; }
  std::shared_ptr<const Objective> shared_objective() const noexcept { return objective_; }
  Bounds bounds() const noexcept { return bounds_; }

  /// One replicate. Throws EvaluationError / OutOfRangeError / BudgetExceededError.
  Observation evaluate(const Solution& x, std::uint64_t seed);

  /// Evaluates every request; observations come back in request order with
  /// consecutive eval indices, independent of scheduling.
  std::vector<Observation> evaluate_batch(std::span<const EvalRequest> requests,
                                          Execution exec = Execution::parallel);

  std::uint64_t evaluations() const noexcept { return counter_.load(); }

  /// Hard cap on evaluations; exceeding it throws BudgetExceededError.
  void set_eval_cap(std::optional<std::uint64_t> cap) noexcept { cap_ = cap; }
  std::optional<std::uint64_t> eval_cap() const noexcept { return cap_; }
  std::optional<std::uint64_t> remaining() const noexcept;

  void set_sink(Sink sink) { sink_ = std::move(sink); }
  void set_stage(std::int64_t stage) noexcept { stage_ = stage; }

  /// Raw evaluation without counting or recording; used by the batch
  /// kernels after indices have been reserved.
  Observation evaluate_unrecorded(const EvalRequest& request, std::uint64_t eval_index) const;
  /// Reserves `n` consecutive eval indices and returns the first.
  std::uint64_t reserve(std::uint64_t n);
  void publish(const Observation& obs) const;

 private:
  std::shared_ptr<const Objective> objective_;
  SearchSpace space_;
  Bounds bounds_;
  std::atomic<std::uint64_t> counter_{0};
  std::optional<std::uint64_t> cap_;
  Sink sink_;
  std::int64_t stage_ = 0;
};

// ---------------------------------------------------------------------------
// Synthetic objectives

struct GaussianNoise {
  double sigma = 0.0;
};

/// Accuracy on a validation set of n_val samples: Binomial(n_val, mu) / n_val.
struct BernoulliAccuracy {
  std::uint32_t n_val = 100;
};

using NoiseModel = std::variant<GaussianNoise, BernoulliAccuracy>;

/// Objective with a known table of true means, so optimizer output can be
/// scored against the truth. Gaussian observations are clipped to bounds.
class SyntheticObjective final : public Objective {
 public:
  SyntheticObjective(std::vector<double> means, NoiseModel noise, Bounds bounds = {});

  Bounds bounds() const override { return bounds_; }
  std::string name() const override { return "synthetic"; }
  double sample(const SearchSpace& space, const Solution& x, std::uint64_t seed) const override;

  const std::vector<double>& means() const noexcept { return means_; }
  double true_mean(SolutionId id) const { return means_.at(id); }
  /// Flat id of the largest true mean (lowest id on ties).
  SolutionId optimum() const noexcept { return optimum_; }
  const NoiseModel& noise() const noexcept { return noise_; }

 private:
  std::vector<double> means_;
  NoiseModel noise_;
  Bounds bounds_;
  SolutionId optimum_ = 0;
};

// ---------------------------------------------------------------------------
// Replication model: permute / split / estimate

/// Sample-without-replacement permutation: each step draws u in (0,1], takes
/// the ceil(u*m)-th (1-based) element of the shrinking pool.
template <typename UniformSource>
std::vector<std::size_t> permute_indices_with(std::size_t m, UniformSource&& next_uniform) {
  std::vector<std::size_t> pool(m);
  for (std::size_t i = 0; i < m; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(m);
  while (!pool.empty()) {
    const double u = next_uniform();
    auto pos = static_cast<std::size_t>(std::ceil(u * static_cast<double>(pool.size())));
    pos = std::clamp<std::size_t>(pos, 1, pool.size());
    out.push_back(pool[pos - 1]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos - 1));
  }
  return out;
}

std::vector<std::size_t> permute_indices(std::size_t m, std::uint64_t seed);

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// First floor(fraction*m) entries train, the rest validate.
/// Throws DegenerateSplitError if either side is empty.
HoldoutSplit holdout_split(std::span<const std::size_t> permutation, double train_fraction);

struct MeanEstimate {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t replications = 0;
};

/// Mean and sample SD of I replicates with seeds derive_seed(policy, id(x), 0..I-1).
MeanEstimate estimate_mean(ObjectiveHandle& handle, const Solution& x, std::size_t replications,
                           const SeedPolicy& policy);

}  // namespace simopt
