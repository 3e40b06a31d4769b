#include "simopt/sr.hpp"

#include <chrono>
#include <map>
#include <string>

namespace simopt {

std::uint64_t mk_schedule_default(std::uint64_t k) {
  const double raw = std::log(static_cast<double>(k) + 10.0) / std::log(5.0);
  // Exact powers of five must not round up through log error.
  const double nearest = std::round(raw);
  if (std::abs(raw - nearest) < 1e-12) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(raw));
}

std::uint64_t acceptance_threshold(std::uint64_t tests, double alpha) {
  const auto need = static_cast<std::uint64_t>(std::ceil(alpha * static_cast<double>(tests) - 1e-9));
  return std::clamp<std::uint64_t>(need, 1, tests);
}

RulerTestResult sr_accept_test(ObjectiveHandle& handle, const Solution& z, Bounds ruler, std::uint64_t tests,
                               double alpha, ReplicationLedger& replications, Rng& ruler_rng) {
  const SolutionId id = handle.space().flat_index(z);
  return sr_accept_test_with(
      tests, alpha, [&] { return handle.evaluate(z, replications.next_seed(id)).value; },
      [&] { return ruler_rng.uniform(ruler.lower, ruler.upper); });
}

void validate(const SrConfig& config, const SearchSpace& space) {
  if (!(config.ruler.lower < config.ruler.upper)) throw ConfigError("sr: ruler needs a < b");
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) throw ConfigError("sr: alpha must lie in (0, 1]");
  if (!config.mk) throw ConfigError("sr: missing M_k schedule");
  if (!config.stop.target && !config.stop.max_evals && !config.stop.max_wall_seconds) {
    throw ConfigError("sr: no stopping criterion");
  }
  if (config.stop.target) space.validate(*config.stop.target);
  if (config.initial) space.validate(*config.initial);
  if (config.stop.max_evals && *config.stop.max_evals < config.mk(0)) {
    throw ConfigError("sr: budget of " + std::to_string(*config.stop.max_evals) + " evaluations is smaller than one stage");
  }
  if (config.neighborhood == NeighborhoodKind::n1 && space.cardinality() < 2) {
    throw ConfigError("sr: N1 needs at least two solutions");
  }
}

SrTrace run_sr(ObjectiveHandle& handle, const SrConfig& config, const SeedPolicy& seeds) {
  const SearchSpace& space = handle.space();
  validate(config, space);

  const auto start_evals = handle.evaluations();
  const auto start_time = std::chrono::steady_clock::now();
  Rng init_rng(seeds.child(Stream::initial).master_seed);
  Rng candidate_rng(seeds.child(Stream::sr_candidate).master_seed);
  Rng ruler_rng(seeds.child(Stream::sr_ruler).master_seed);
  ReplicationLedger replications(seeds.child(Stream::objective));

  SrTrace trace;
  trace.initial = config.initial ? *config.initial : space.random_solution(init_rng);
  Solution x = trace.initial;

  std::map<SolutionId, std::pair<double, std::uint64_t>> observed;
  auto finish = [&](SrStopReason reason) {
    trace.reason = reason;
    trace.final_solution = x;
    trace.evaluations_used = handle.evaluations() - start_evals;
    trace.stages_count = trace.stages.size();
    double best = 0.0;
    for (const auto& [id, acc] : observed) {
      const double mean = acc.first / static_cast<double>(acc.second);
      if (!trace.best_observed || mean > best) {
        best = mean;
        trace.best_observed = space.solution_at(id);
      }
    }
    trace.best_observed_mean = best;
    return trace;
  };

  for (std::uint64_t k = 0;; ++k) {
    if (config.stop.target && x == *config.stop.target) return finish(SrStopReason::target_reached);
    const std::uint64_t tests = config.mk(k);
    if (tests == 0) throw ConfigError("sr: M_k must be positive");
    if (config.stop.max_evals && handle.evaluations() - start_evals + tests > *config.stop.max_evals) {
      return finish(SrStopReason::eval_budget);
    }
    if (config.stop.max_wall_seconds) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_time;
      if (elapsed.count() >= *config.stop.max_wall_seconds) return finish(SrStopReason::wall_budget);
    }

    SrStage stage;
    stage.k = k;
    stage.current = x;
    stage.candidate = sample_neighbor(space, x, config.neighborhood, candidate_rng);
    handle.set_stage(static_cast<std::int64_t>(k));
    const SolutionId cid = space.flat_index(stage.candidate);
    RulerTestResult result;
    try {
      result = sr_accept_test_with(
          tests, config.alpha,
          [&] {
            const double v = handle.evaluate(stage.candidate, replications.next_seed(cid)).value;
            auto& acc = observed[cid];
            acc.first += v;
            acc.second += 1;
            return v;
          },
          [&] { return ruler_rng.uniform(config.ruler.lower, config.ruler.upper); });
    } catch (const Error& e) {
      finish(SrStopReason::eval_budget);
      throw SrAborted(std::string("SR aborted: ") + e.what(), trace, std::current_exception());
    }
    stage.tests = result.tests;
    stage.accepted = result.accepted;
    if (result.accepted) x = stage.candidate;
    trace.stages.push_back(std::move(stage));
  }
}

}  // namespace simopt
