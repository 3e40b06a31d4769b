#include "simopt/objective.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "simopt/errors.hpp"
#include "simopt/kernels.hpp"

namespace simopt {

SeedPolicy SeedPolicy::child(Stream stream) const noexcept {
  return child(static_cast<std::uint64_t>(stream) * 0x632be59bd9b4e019ULL + 0x1234567ULL);
}

SeedPolicy SeedPolicy::child(std::uint64_t index) const noexcept {
  return SeedPolicy{mix64(mix64(master_seed) ^ mix64(index ^ 0xa0761d6478bd642fULL)), seed_range};
}

std::uint64_t derive_seed(const SeedPolicy& policy, std::uint64_t solution_id,
                          std::uint64_t replication) noexcept {
  std::uint64_t h = mix64(policy.master_seed);
  h = mix64(h ^ (solution_id * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (replication * 0xabc98388fb8fac03ULL + 0x8cb92ba72f3d8dd7ULL));
  if (policy.seed_range == 0) return h == 0 ? 1 : h;
  return h % policy.seed_range + 1;
}

std::uint64_t ReplicationLedger::next_seed(SolutionId id) {
  const std::uint64_t rep = next_[id]++;
  return derive_seed(policy_, id, rep);
}

std::uint64_t ReplicationLedger::count(SolutionId id) const {
  auto it = next_.find(id);
  return it == next_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------

ObjectiveHandle::ObjectiveHandle(std::shared_ptr<const Objective> objective, SearchSpace space)
    : objective_(std::move(objective)), space_(std::move(space)) {
  if (!objective_) throw ConfigError("objective handle needs an objective");
  bounds_ = objective_->bounds();
  if (!(bounds_.lower < bounds_.upper)) throw ConfigError("objective bounds need a < b");
}

std::optional<std::uint64_t> ObjectiveHandle::remaining() const noexcept {
  if (!cap_) return std::nullopt;
  const auto used = counter_.load();
  return used >= *cap_ ? 0 : *cap_ - used;
}

std::uint64_t ObjectiveHandle::reserve(std::uint64_t n) {
  if (cap_) {
    const auto used = counter_.load();
    if (used + n > *cap_) {
      throw BudgetExceededError("evaluation budget of " + std::to_string(*cap_) + " exceeded");
    }
  }
  return counter_.fetch_add(n);
}

Observation ObjectiveHandle::evaluate_unrecorded(const EvalRequest& request, std::uint64_t eval_index) const {
  Observation obs;
  obs.solution = request.solution;
  obs.solution_id = space_.flat_index(request.solution);
  obs.seed = request.seed;
  obs.eval_index = eval_index;
  obs.stage = stage_;
  const auto start = std::chrono::steady_clock::now();
  obs.value = objective_->sample(space_, request.solution, request.seed);
  obs.wall_nanos =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
  if (!std::isfinite(obs.value) || obs.value < bounds_.lower || obs.value > bounds_.upper) {
    throw OutOfRangeError("objective '" + objective_->name() + "' returned " + std::to_string(obs.value) +
                          " outside [" + std::to_string(bounds_.lower) + ", " + std::to_string(bounds_.upper) +
                          "]");
  }
  return obs;
}

void ObjectiveHandle::publish(const Observation& obs) const {
  if (sink_) sink_(obs);
}

Observation ObjectiveHandle::evaluate(const Solution& x, std::uint64_t seed) {
  space_.validate(x);
  const auto index = reserve(1);
  auto obs = evaluate_unrecorded(EvalRequest{x, seed}, index);
  publish(obs);
  return obs;
}

std::vector<Observation> ObjectiveHandle::evaluate_batch(std::span<const EvalRequest> requests, Execution exec) {
  for (const auto& r : requests) space_.validate(r.solution);
  std::vector<Observation> out(requests.size());
  if (requests.empty()) return out;
  const auto first = reserve(requests.size());
  if (exec == Execution::parallel) {
    kernels::evaluate_parallel(*this, requests, first, out);
  } else {
    kernels::evaluate_serial(*this, requests, first, out);
  }
  for (const auto& obs : out) publish(obs);
  return out;
}

// ---------------------------------------------------------------------------

SyntheticObjective::SyntheticObjective(std::vector<double> means, NoiseModel noise, Bounds bounds)
    : means_(std::move(means)), noise_(noise), bounds_(bounds) {
  if (means_.empty()) throw ConfigError("synthetic objective needs at least one mean");
  if (!(bounds_.lower < bounds_.upper)) throw ConfigError("synthetic objective bounds need a < b");
  for (double mu : means_) {
    if (!std::isfinite(mu) || mu < bounds_.lower || mu > bounds_.upper) {
      throw ConfigError("synthetic mean " + std::to_string(mu) + " outside bounds");
    }
  }
  if (const auto* g = std::get_if<GaussianNoise>(&noise_); g && !(g->sigma >= 0.0)) {
    throw ConfigError("gaussian sigma must be >= 0");
  }
  if (const auto* b = std::get_if<BernoulliAccuracy>(&noise_)) {
    if (b->n_val == 0) throw ConfigError("bernoulli-accuracy needs n_val >= 1");
    if (bounds_.lower > 0.0 || bounds_.upper < 1.0) throw ConfigError("bernoulli-accuracy needs bounds covering [0,1]");
  }
  optimum_ = static_cast<SolutionId>(std::max_element(means_.begin(), means_.end()) - means_.begin());
}

double SyntheticObjective::sample(const SearchSpace& space, const Solution& x, std::uint64_t seed) const {
  const SolutionId id = space.flat_index(x);
  if (id >= means_.size()) throw EvaluationError("synthetic objective has no mean for solution " + std::to_string(id));
  const double mu = means_[id];
  Rng rng(seed);
  return std::visit(
      [&](const auto& noise) -> double {
        using T = std::decay_t<decltype(noise)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (noise.sigma == 0.0) return mu;
          return std::clamp(mu + noise.sigma * rng.normal(), bounds_.lower, bounds_.upper);
        } else {
          std::uint32_t successes = 0;
          for (std::uint32_t i = 0; i < noise.n_val; ++i) successes += rng.uniform() < mu ? 1U : 0U;
          return static_cast<double>(successes) / static_cast<double>(noise.n_val);
        }
      },
      noise_);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> permute_indices(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  return permute_indices_with(m, [&rng] { return rng.uniform_open0(); });
}

HoldoutSplit holdout_split(std::span<const std::size_t> permutation, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DegenerateSplitError("train fraction must lie in (0, 1)");
  }
  const auto m = permutation.size();
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train == m) {
    throw DegenerateSplitError("split of " + std::to_string(m) + " items at " + std::to_string(train_fraction) +
                               " leaves one side empty");
  }
  HoldoutSplit split;
  split.train.assign(permutation.begin(), permutation.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(permutation.begin() + static_cast<std::ptrdiff_t>(n_train), permutation.end());
  return split;
}

MeanEstimate estimate_mean(ObjectiveHandle& handle, const Solution& x, std::size_t replications,
                           const SeedPolicy& policy) {
  if (replications == 0) throw ConfigError("estimate_mean needs at least one replication");
  const SolutionId id = handle.space().flat_index(x);
  std::vector<EvalRequest> requests;
  requests.reserve(replications);
  for (std::size_t i = 0; i < replications; ++i) requests.push_back({x, derive_seed(policy, id, i)});
  const auto obs = handle.evaluate_batch(requests);

  MeanEstimate est;
  est.replications = replications;
  double sum = 0.0;
  for (const auto& o : obs) sum += o.value;
  est.mean = sum / static_cast<double>(replications);
  if (replications > 1) {
    double ss = 0.0;
    for (const auto& o : obs) ss += (o.value - est.mean) * (o.value - est.mean);
    est.sd = std::sqrt(ss / static_cast<double>(replications - 1));
  }
  return est;
}

}  // namespace simopt
