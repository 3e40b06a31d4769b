#include "doctest.h"

#include <cmath>
#include <map>

#include "problems.hpp"
#include "simopt/ah.hpp"
#include "simopt/errors.hpp"

using namespace simopt;

TEST_CASE("allocation schedule") {
  CHECK(ah_alloc_default(1) == 1);
  CHECK(ah_alloc_default(2) == 4);
  CHECK(ah_alloc_default(3) == 5);
  CHECK(ah_alloc_default(100) == 5);
  const double raw2 = 5.0 * std::pow(std::log(2.0), 1.01);
  CHECK(raw2 > 3.4);
  CHECK(raw2 < 3.5);
}

TEST_CASE("hyperbox bounds examples") {
  const auto line = SearchSpace::from_arities({13});
  CHECK(hyperbox_bounds(std::vector<Solution>{{{5}}}, {{5}}, line) == Hyperbox{{0, 12}});
  const std::vector<Solution> visited{{{2}}, {{5}}, {{9}}};
  CHECK(hyperbox_bounds(visited, {{5}}, line) == Hyperbox{{2, 9}});
  const std::vector<Solution> more{{{2}}, {{3}}, {{5}}, {{9}}, {{11}}, {{7}}};
  CHECK(hyperbox_bounds(more, {{5}}, line) == Hyperbox{{3, 7}});

  const auto grid = SearchSpace::from_arities({5, 5});
  const std::vector<Solution> same_row{{{2, 2}}, {{2, 4}}, {{2, 0}}};
  CHECK(hyperbox_bounds(same_row, {{2, 2}}, grid) == Hyperbox{{0, 4}, {0, 4}});
}

TEST_CASE("hyperbox contains the incumbent and its box neighbors") {
  const auto space = SearchSpace::from_arities({6, 4, 5});
  Rng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<Solution> visited;
    for (int i = 0; i < 1 + static_cast<int>(rng.below(15)); ++i) visited.push_back(space.random_solution(rng));
    const auto inc = visited[rng.below(visited.size())];
    const auto box = hyperbox_bounds(visited, inc, space);
    CHECK(in_box(box, inc));
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      CHECK(box[d].lower <= inc.indices[d]);
      CHECK(box[d].upper >= inc.indices[d]);
      if (inc.indices[d] > 0) CHECK(box[d].lower < inc.indices[d]);
      if (inc.indices[d] + 1 < space.arity(d)) CHECK(box[d].upper > inc.indices[d]);
    }
  }
}

TEST_CASE("sample_mpa small cases") {
  const auto space = SearchSpace::from_arities({5, 5});
  Rng rng(1);
  const Solution inc{{2, 2}};
  const Hyperbox single{{2, 2}, {2, 2}};
  CHECK(sample_mpa(single, space, 3, inc, rng).empty());
  const Hyperbox four{{2, 3}, {2, 3}};
  const auto all = sample_mpa(four, space, 3, inc, rng);
  CHECK(all.size() == 3);
  for (const auto& s : all) {
    CHECK(in_box(four, s));
    CHECK(s != inc);
  }
  const Hyperbox wide{{0, 4}, {0, 4}};
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = sample_mpa(wide, space, 3, inc, rng);
    CHECK(s.size() == 3);
    std::set<Solution> distinct(s.begin(), s.end());
    CHECK(distinct.size() == 3);
    CHECK(distinct.count(inc) == 0);
  }
}

TEST_CASE("sample_mpa is uniform over a 10-point MPA") {
  const auto space = SearchSpace::from_arities({11});
  const Hyperbox box{{0, 10}};
  const Solution inc{{4}};
  Rng rng(77);
  std::map<std::size_t, double> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[sample_mpa(box, space, 1, inc, rng).front().indices[0]] += 1.0;
  REQUIRE(counts.size() == 10);
  const double p = 0.1, sd = std::sqrt(p * (1 - p) / draws);
  for (const auto& [x, c] : counts) CHECK(std::abs(c / draws - p) < 3 * sd + 1e-12);
}

TEST_CASE("two zero-noise solutions: incumbent switches at iteration 1 and stays") {
  const auto space = SearchSpace::from_arities({2});
  ObjectiveHandle h(simopt::testing::gaussian({1.0, 0.0}, 0.0), space);
  AhConfig cfg;
  cfg.budget = 60;
  cfg.initial = Solution{{1}};
  const auto res = run_ah(h, cfg, SeedPolicy{1});
  REQUIRE(!res.iterations.empty());
  for (const auto& it : res.iterations) CHECK(it.incumbent == Solution{{0}});
  CHECK(res.incumbent == Solution{{0}});
  CHECK(res.answer == Solution{{0}});
}

TEST_CASE("AH accounting and cumulative means") {
  const auto space = SearchSpace::from_arities({5, 5});
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::ah_peak_means(), 0.05), space);
  std::map<SolutionId, std::pair<double, std::uint64_t>> seen;
  h.set_sink([&](const Observation& o) {
    seen[o.solution_id].first += o.value;
    seen[o.solution_id].second += 1;
  });
  AhConfig cfg;
  cfg.budget = 500;
  const auto res = run_ah(h, cfg, SeedPolicy{9});
  CHECK(res.evaluations_used == h.evaluations());
  CHECK(res.evaluations_used <= 500);
  std::uint64_t expected = 1;
  for (const auto& it : res.iterations) {
    expected += it.alloc * (it.sampled.size() + 1);
    CHECK(it.evaluations == expected);
  }
  CHECK(res.evaluations_used == expected);
  REQUIRE(seen.size() == res.visited.size());
  for (const auto& [id, v] : res.visited) {
    CHECK(v.count == seen[id].second);
    CHECK(v.sum == doctest::Approx(seen[id].first).epsilon(1e-12));
  }
  CHECK(res.incumbent_mean == res.visited.at(space.flat_index(res.incumbent)).mean());
}

TEST_CASE("incumbent is the argmax over B_k and always inside the box") {
  const auto space = SearchSpace::from_arities({5, 5});
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::ah_peak_means(), 0.1), space);
  AhConfig cfg;
  cfg.budget = 800;
  cfg.exec = Execution::serial;
  const auto res = run_ah(h, cfg, SeedPolicy{12});
  Solution prev = res.initial;
  for (const auto& it : res.iterations) {
    CHECK(in_box(it.box, prev));
    CHECK(((it.incumbent == prev) ||
           std::find(it.sampled.begin(), it.sampled.end(), it.incumbent) != it.sampled.end()));
    prev = it.incumbent;
  }
}

TEST_CASE("box widths shrink when new points land strictly inside") {
  const auto space = SearchSpace::from_arities({9, 9});
  ObjectiveHandle h(simopt::testing::gaussian(std::vector<double>(81, 0.5), 0.1), space);
  AhConfig cfg;
  cfg.budget = 1500;
  const auto res = run_ah(h, cfg, SeedPolicy{4});
  auto centre = [&](std::size_t i) { return i == 0 ? res.initial : res.iterations[i - 1].incumbent; };
  REQUIRE(res.iterations.size() > 10);
  for (std::size_t i = 1; i < res.iterations.size(); ++i) {
    const auto& before = res.iterations[i - 1];
    const auto& after = res.iterations[i];
    if (centre(i) != centre(i - 1)) continue;
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(after.box[d].lower >= before.box[d].lower);
      CHECK(after.box[d].upper <= before.box[d].upper);
    }
  }
}

TEST_CASE("AH finds the unique local optimum of a unimodal surface") {
  const auto space = SearchSpace::from_arities({5, 5});
  const auto means = simopt::testing::ah_peak_means();
  int local = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ObjectiveHandle h(simopt::testing::gaussian(means, 0.01), space);
    AhConfig cfg;
    cfg.budget = 2000;
    const auto res = run_ah(h, cfg, SeedPolicy{seed});
    local += simopt::testing::is_local_optimum(space, means, space.flat_index(res.incumbent));
  }
  CHECK(local >= 18);
}

TEST_CASE("AH with KN clean-up stays inside the budget") {
  const auto space = SearchSpace::from_arities({5, 5});
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::ah_peak_means(), 0.05), space);
  AhConfig cfg;
  cfg.budget = 1000;
  cfg.cleanup_kn = true;
  const auto res = run_ah(h, cfg, SeedPolicy{2});
  REQUIRE(res.cleanup);
  CHECK(res.evaluations_used <= 1000);
  CHECK(h.evaluations() == res.evaluations_used);
}

TEST_CASE("AH config validation") {
  const auto space = SearchSpace::from_arities({5, 5});
  AhConfig cfg;
  cfg.budget = 3;
  CHECK_THROWS_AS(validate(cfg, space), ConfigError);
  cfg.budget = 4;
  CHECK_NOTHROW(validate(cfg, space));
  cfg.m = 0;
  CHECK_THROWS_AS(validate(cfg, space), ConfigError);
}
