#include "simopt/ah.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace simopt {

std::uint64_t ah_alloc_default(std::uint64_t k) {
  if (k <= 1) return 1;
  const double raw = std::ceil(5.0 * std::pow(std::log(static_cast<double>(k)), 1.01));
  return static_cast<std::uint64_t>(std::clamp(raw, 1.0, 5.0));
}

Hyperbox hyperbox_bounds(std::span<const Solution> visited, const Solution& incumbent, const SearchSpace& space) {
  space.validate(incumbent);
  Hyperbox box(space.dimension());
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const std::size_t c = incumbent.indices[d];
    std::size_t lower = 0;
    std::size_t upper = space.arity(d) - 1;
    for (const auto& y : visited) {
      const std::size_t v = y.indices.at(d);
      if (v < c) lower = std::max(lower, v);
      if (v > c) upper = std::min(upper, v);
    }
    box[d] = {lower, upper};
  }
  return box;
}

std::uint64_t hyperbox_volume(const Hyperbox& box) {
  std::uint64_t v = 1;
  for (const auto& iv : box) v *= iv.upper - iv.lower + 1;
  return v;
}

bool in_box(const Hyperbox& box, const Solution& x) {
  if (x.indices.size() != box.size()) return false;
  for (std::size_t d = 0; d < box.size(); ++d) {
    if (x.indices[d] < box[d].lower || x.indices[d] > box[d].upper) return false;
  }
  return true;
}

std::vector<Solution> sample_mpa(const Hyperbox& box, const SearchSpace& space, std::size_t m,
                                 const Solution& incumbent, Rng& rng) {
  std::vector<Solution> out;
  if (m == 0) return out;
  const std::uint64_t volume = hyperbox_volume(box);
  const std::uint64_t available = volume - (in_box(box, incumbent) ? 1 : 0);

  if (available <= m) {
    // Enumerate the whole box in flat order.
    Solution y;
    y.indices.resize(box.size());
    for (std::uint64_t i = 0; i < volume; ++i) {
      std::uint64_t rest = i;
      for (std::size_t d = box.size(); d-- > 0;) {
        const std::uint64_t width = box[d].upper - box[d].lower + 1;
        y.indices[d] = box[d].lower + static_cast<std::size_t>(rest % width);
        rest /= width;
      }
      if (y != incumbent) out.push_back(y);
    }
    std::sort(out.begin(), out.end(),
              [&](const Solution& a, const Solution& b) { return space.flat_index(a) < space.flat_index(b); });
    return out;
  }

  std::set<Solution> chosen;
  Solution y;
  y.indices.resize(box.size());
  while (out.size() < m) {
    for (std::size_t d = 0; d < box.size(); ++d) {
      y.indices[d] = box[d].lower + static_cast<std::size_t>(rng.below(box[d].upper - box[d].lower + 1));
    }
    if (y == incumbent || !chosen.insert(y).second) continue;
    out.push_back(y);
  }
  return out;
}

void validate(const AhConfig& config, const SearchSpace& space) {
  if (config.m < 1) throw ConfigError("ah: m must be >= 1");
  if (!config.alloc) throw ConfigError("ah: missing allocation schedule");
  if (config.initial) space.validate(*config.initial);
  const std::uint64_t first = std::max<std::uint64_t>(1, config.alloc(1));
  if (config.budget < first * (config.m + 1)) {
    throw ConfigError("ah: budget " + std::to_string(config.budget) + " is below alloc(1)*(m+1) = " +
                      std::to_string(first * (config.m + 1)));
  }
  if (config.cleanup_kn) validate(config.cleanup);
}

AhResult run_ah(ObjectiveHandle& handle, const AhConfig& config, const SeedPolicy& seeds) {
  const SearchSpace& space = handle.space();
  validate(config, space);

  std::uint64_t cleanup_budget = 0;
  if (config.cleanup_kn) {
    cleanup_budget = config.cleanup_budget ? config.cleanup_budget : config.budget / 5;
    if (cleanup_budget >= config.budget) throw ConfigError("ah: cleanup budget leaves nothing for the search");
  }
  const std::uint64_t local_budget = config.budget - cleanup_budget;

  const auto start_evals = handle.evaluations();
  auto used = [&] { return handle.evaluations() - start_evals; };
  Rng init_rng(seeds.child(Stream::initial).master_seed);
  Rng sample_rng(seeds.child(Stream::ah_sample).master_seed);
  ReplicationLedger replications(seeds.child(Stream::objective));

  AhResult result;
  result.initial = config.initial ? *config.initial : space.random_solution(init_rng);

  auto alloc = [&](std::uint64_t k) { return std::max<std::uint64_t>(1, config.alloc(k)); };
  auto observe = [&](const std::vector<Solution>& members, std::uint64_t n) {
    std::vector<EvalRequest> requests;
    requests.reserve(members.size() * n);
    for (const auto& x : members) {
      const SolutionId id = space.flat_index(x);
      for (std::uint64_t j = 0; j < n; ++j) requests.push_back({x, replications.next_seed(id)});
    }
    std::vector<Observation> obs;
    try {
      obs = handle.evaluate_batch(requests, config.exec);
    } catch (const Error& e) {
      result.evaluations_used = used();
      result.answer = result.incumbent;
      throw AhAborted(std::string("AH aborted: ") + e.what(), result, std::current_exception());
    }
    for (const auto& o : obs) {
      auto& v = result.visited[o.solution_id];
      v.count += 1;
      v.sum += o.value;
    }
  };

  // Step 0.
  handle.set_stage(0);
  result.incumbent = result.initial;
  observe({result.initial}, alloc(1));
  result.incumbent_mean = result.visited.at(space.flat_index(result.initial)).mean();
  std::vector<Solution> last_members{result.initial};

  std::vector<Solution> visited_points{result.initial};
  for (std::uint64_t k = 1;; ++k) {
    AhIteration it;
    it.k = k;
    it.box = hyperbox_bounds(visited_points, result.incumbent, space);
    it.sampled = sample_mpa(it.box, space, config.m, result.incumbent, sample_rng);
    it.alloc = alloc(k);

    std::vector<Solution> members = it.sampled;
    members.push_back(result.incumbent);
    if (used() + it.alloc * members.size() > local_budget) break;

    handle.set_stage(static_cast<std::int64_t>(k));
    observe(members, it.alloc);
    for (const auto& s : it.sampled) {
      if (std::find(visited_points.begin(), visited_points.end(), s) == visited_points.end()) {
        visited_points.push_back(s);
      }
    }

    // argmax over B_k, lowest flat index on ties.
    const Solution* best = nullptr;
    double best_mean = -std::numeric_limits<double>::infinity();
    SolutionId best_id = 0;
    for (const auto& x : members) {
      const SolutionId id = space.flat_index(x);
      const double mean = result.visited.at(id).mean();
      if (!best || mean > best_mean || (mean == best_mean && id < best_id)) {
        best = &x;
        best_mean = mean;
        best_id = id;
      }
    }
    result.incumbent = *best;
    result.incumbent_mean = best_mean;
    it.incumbent = result.incumbent;
    it.incumbent_mean = best_mean;
    it.evaluations = used();
    result.iterations.push_back(std::move(it));
    last_members = std::move(members);
  }

  result.answer = result.incumbent;
  if (config.cleanup_kn && last_members.size() >= 2) {
    std::vector<SolutionId> ids;
    for (const auto& x : last_members) ids.push_back(space.flat_index(x));
    std::sort(ids.begin(), ids.end());
    if (ids.size() <= cleanup_budget) {
      KnConfig kn = config.cleanup;
      kn.budget = cleanup_budget;
      kn.exec = config.exec;
      result.cleanup = run_kn_on(handle, ids, kn, seeds.child(Stream::cleanup));
      result.answer = space.solution_at(result.cleanup->winner ? *result.cleanup->winner
                                                               : best_survivor(*result.cleanup).id);
    }
  }
  result.evaluations_used = used();
  return result;
}

}  // namespace simopt
