#include "simopt/kn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "simopt/kernels.hpp"

namespace simopt {

KnConstants kn_constants(std::size_t n_solutions, std::size_t r0, double p) {
  if (n_solutions < 2) throw TrivialProblemError("KN needs at least two solutions");
  if (r0 < 2) throw ConfigError("KN needs r0 >= 2");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("KN needs p in (0, 1)");
  const double base = 2.0 * p / static_cast<double>(n_solutions - 1);
  const double r = static_cast<double>(r0 - 1);
  KnConstants c;
  c.eta = 0.5 * (std::pow(base, -2.0 / r) - 1.0);
  c.h2 = 2.0 * c.eta * r;
  return c;
}

double pairwise_variance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pairwise_variance: sample lengths differ");
  if (a.size() < 2) throw std::invalid_argument("pairwise_variance: need at least two pairs");
  return paired_difference_variance(a.data(), b.data(), a.size());
}

void validate(const KnConfig& config) {
  if (config.r0 < 2) throw ConfigError("kn: r0 must be >= 2");
  if (!(config.delta > 0.0)) throw ConfigError("kn: delta must be > 0");
  if (!(config.p > 0.0 && config.p < 1.0)) throw ConfigError("kn: p must lie in (0, 1)");
}

const KnSurvivor& best_survivor(const KnOutcome& outcome) {
  if (outcome.survivors.empty()) throw std::logic_error("KN outcome has no survivors");
  return *std::max_element(outcome.survivors.begin(), outcome.survivors.end(),
                           [](const KnSurvivor& a, const KnSurvivor& b) {
                             if (a.mean != b.mean) return a.mean < b.mean;
                             return a.id > b.id;
                           });
}

namespace {

struct KnRun {
  std::vector<SolutionId> ids;
  std::vector<double> sums;
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> survivors;  // positions into ids
  KnOutcome outcome;

  void fill_survivors() {
    outcome.survivors.clear();
    for (std::size_t pos : survivors) {
      outcome.survivors.push_back({ids[pos], sums[pos] / static_cast<double>(counts[pos]), counts[pos]});
    }
    std::sort(outcome.survivors.begin(), outcome.survivors.end(),
              [](const KnSurvivor& a, const KnSurvivor& b) { return a.id < b.id; });
  }
};

}  // namespace

KnOutcome run_kn(ObjectiveHandle& handle, const KnConfig& config, const SeedPolicy& seeds) {
  const auto card = handle.space().cardinality();
  std::vector<SolutionId> all(card);
  std::iota(all.begin(), all.end(), SolutionId{0});
  return run_kn_on(handle, all, config, seeds);
}

KnOutcome run_kn_on(ObjectiveHandle& handle, std::span<const SolutionId> candidates, const KnConfig& config,
                    const SeedPolicy& seeds) {
  validate(config);
  const std::size_t n = candidates.size();
  if (n < 2) throw TrivialProblemError("KN needs at least two candidate solutions");
  if (config.budget && *config.budget < n) {
    throw ConfigError("kn: budget " + std::to_string(*config.budget) + " cannot give one evaluation to each of " +
                      std::to_string(n) + " solutions");
  }

  const auto start_evals = handle.evaluations();
  const SearchSpace& space = handle.space();
  std::size_t r0 = config.r0;
  if (config.budget) r0 = std::min<std::size_t>(r0, static_cast<std::size_t>(*config.budget / n));

  KnRun run;
  run.ids.assign(candidates.begin(), candidates.end());
  run.sums.assign(n, 0.0);
  run.counts.assign(n, 0);
  run.survivors.resize(n);
  std::iota(run.survivors.begin(), run.survivors.end(), std::size_t{0});
  if (r0 >= 2) run.outcome.constants = kn_constants(n, r0, config.p);

  auto used = [&] { return handle.evaluations() - start_evals; };
  auto finish = [&](KnMode mode) {
    run.outcome.mode = mode;
    run.outcome.evaluations_used = used();
    run.fill_survivors();
    return run.outcome;
  };
  auto observe = [&](std::span<const std::size_t> positions, std::size_t reps) {
    std::vector<EvalRequest> requests;
    requests.reserve(positions.size() * reps);
    for (std::size_t pos : positions) {
      const Solution x = space.solution_at(run.ids[pos]);
      for (std::size_t j = 0; j < reps; ++j) {
        requests.push_back({x, derive_seed(seeds, run.ids[pos], run.counts[pos] + j)});
      }
    }
    std::vector<Observation> obs;
    try {
      obs = handle.evaluate_batch(requests, config.exec);
    } catch (const Error& e) {
      run.outcome.evaluations_used = used();
      run.fill_survivors();
      throw KnAborted(std::string("KN aborted: ") + e.what(), run.outcome, std::current_exception());
    }
    return obs;
  };

  // Initial R0 replications per solution.
  handle.set_stage(static_cast<std::int64_t>(r0));
  const auto first = observe(run.survivors, r0);
  std::vector<double> samples(n * r0);
  for (std::size_t i = 0; i < first.size(); ++i) {
    samples[i] = first[i].value;
    run.sums[i / r0] += first[i].value;
  }
  for (auto& c : run.counts) c = r0;
  run.outcome.iterations = r0;

  if (r0 < 2) return finish(KnMode::budget_exhausted);

  const auto s2 = config.exec == Execution::parallel ? kernels::pairwise_variance_parallel(samples, n, r0)
                                                     : kernels::pairwise_variance_serial(samples, n, r0);
  const double h2 = run.outcome.constants.h2;
  std::vector<double> means(n);

  for (std::uint64_t k = r0;; ++k) {
    for (std::size_t pos : run.survivors) means[pos] = run.sums[pos] / static_cast<double>(run.counts[pos]);
    const double kd = static_cast<double>(k);
    run.survivors = config.exec == Execution::parallel
                        ? kernels::screen_parallel(run.survivors, means, s2, kd, config.delta, h2)
                        : kernels::screen_serial(run.survivors, means, s2, kd, config.delta, h2);
    run.outcome.survivor_counts.push_back(run.survivors.size());
    run.outcome.iterations = k;

    if (run.survivors.size() == 1) {
      run.outcome.winner = run.ids[run.survivors.front()];
      return finish(KnMode::completed);
    }

    // Every bound is zero: only exact max-mean ties remain, and more data
    // cannot separate them if their differences have zero variance.
    bool bounds_exhausted = true;
    for (std::size_t a = 0; a < run.survivors.size() && bounds_exhausted; ++a) {
      for (std::size_t b = a + 1; b < run.survivors.size(); ++b) {
        if (continuation_bound(kd, config.delta, h2, s2.at(run.survivors[a], run.survivors[b])) > 0.0) {
          bounds_exhausted = false;
          break;
        }
      }
    }
    if (bounds_exhausted) {
      const auto best = *std::max_element(run.survivors.begin(), run.survivors.end(),
                                          [&](std::size_t a, std::size_t b) {
                                            if (means[a] != means[b]) return means[a] < means[b];
                                            return run.ids[a] > run.ids[b];
                                          });
      run.survivors = {best};
      run.outcome.winner = run.ids[best];
      run.outcome.tie_break = true;
      return finish(KnMode::completed);
    }

    if (config.budget && used() + run.survivors.size() > *config.budget) {
      return finish(KnMode::budget_exhausted);
    }

    handle.set_stage(static_cast<std::int64_t>(k + 1));
    const auto obs = observe(run.survivors, 1);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::size_t pos = run.survivors[i];
      run.sums[pos] += obs[i].value;
      run.counts[pos] += 1;
    }
  }
}

}  // namespace simopt
