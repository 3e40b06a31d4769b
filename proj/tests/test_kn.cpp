#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numeric>

#include "problems.hpp"
#include "simopt/errors.hpp"
#include "simopt/kernels.hpp"
#include "simopt/kn.hpp"

using namespace simopt;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

std::pair<double, double> eta_oracle(int n, int r0, const char* p) {
  const Big base = Big(2) * Big(p) / Big(n - 1);
  const Big eta = (boost::multiprecision::pow(base, Big(-2) / Big(r0 - 1)) - 1) / 2;
  return {eta.convert_to<double>(), (2 * eta * (r0 - 1)).convert_to<double>()};
}

class FailingObjective final : public Objective {
 public:
  Bounds bounds() const override { return {0.0, 1.0}; }
  std::string name() const override { return "failing"; }
  double sample(const SearchSpace& space, const Solution& x, std::uint64_t) const override {
    if (space.flat_index(x) == 3) throw EvaluationError("boom");
    return 0.5;
  }
};

}  // namespace

TEST_CASE("KN constants against a 50-digit oracle") {
  for (auto [n, r0, p] : {std::tuple{200, 10, "0.05"}, std::tuple{10, 10, "0.05"}, std::tuple{25, 5, "0.1"}}) {
    const auto c = kn_constants(static_cast<std::size_t>(n), static_cast<std::size_t>(r0), std::stod(p));
    const auto [eta, h2] = eta_oracle(n, r0, p);
    CHECK(std::abs(c.eta - eta) < 1e-9);
    CHECK(std::abs(c.h2 - h2) < 1e-9);
  }
  const auto c200 = kn_constants(200, 10, 0.05);
  CHECK(std::abs(c200.eta - 2.2042) < 1e-3);
  CHECK(std::abs(c200.h2 - 39.676) < 1e-3);
  const auto c10 = kn_constants(10, 10, 0.05);
  CHECK(std::abs(c10.eta - 0.85908) < 1e-3);
  CHECK(std::abs(c10.h2 - 15.4635) < 1e-3);
}

TEST_CASE("KN constants edge cases") {
  const auto c = kn_constants(2, 2, 0.5);
  CHECK(c.eta == 0.0);
  CHECK(c.h2 == 0.0);
  CHECK_THROWS_AS(kn_constants(1, 10, 0.05), TrivialProblemError);
  CHECK_THROWS_AS(kn_constants(10, 1, 0.05), ConfigError);
  CHECK_THROWS_AS(kn_constants(10, 10, 0.0), ConfigError);
  CHECK_THROWS_AS(kn_constants(10, 10, 1.0), ConfigError);
  CHECK(kn_constants(50, 10, 0.05).eta > 0.0);
}

TEST_CASE("pairwise variance examples") {
  const std::vector<double> a{1, 2, 3}, b{1, 1, 1};
  CHECK(pairwise_variance(a, b) == doctest::Approx(1.0));
  CHECK(pairwise_variance(a, a) == 0.0);
  Rng rng(1);
  std::vector<double> x(20), y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
  }
  CHECK(pairwise_variance(x, y) == doctest::Approx(pairwise_variance(y, x)).epsilon(1e-14));
  CHECK_THROWS_AS(pairwise_variance(a, std::vector<double>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(pairwise_variance(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("continuation bound examples") {
  CHECK(continuation_bound(5, 0.1, 1.0, 0.01) == 0.0);
  CHECK(std::abs(continuation_bound(10, 0.1, 39.676, 0.02) - 0.34676) < 1e-4);
  double prev = continuation_bound(1, 0.05, 15.46, 0.01);
  for (int k = 2; k < 300; ++k) {
    const double g = continuation_bound(k, 0.05, 15.46, 0.01);
    CHECK(g <= prev);
    CHECK(g >= 0.0);
    prev = g;
  }
}

TEST_CASE("screen examples") {
  // delta=0.1, k=10, h2=1, s2=0.14 gives G = 0.005 * (14 - 10) = 0.02.
  PackedSymmetric s2(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) s2.set(i, j, 0.14);
  CHECK(std::abs(continuation_bound(10, 0.1, 1.0, 0.14) - 0.02) < 1e-12);
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK(kernels::screen_serial(all, std::vector<double>{0.9, 0.85, 0.5}, s2, 10, 0.1, 1.0) ==
        std::vector<std::size_t>{0});
  CHECK(kernels::screen_serial(all, std::vector<double>{0.7, 0.7, 0.7}, s2, 10, 0.1, 1.0) == all);
  CHECK(kernels::screen_serial(all, std::vector<double>{0.9, 0.85, 0.5}, s2, 10, 0.1, 1e6) == all);
}

TEST_CASE("screen never drops the current best") {
  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(20);
    PackedSymmetric s2(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s2.set(i, j, rng.uniform(0.0, 0.02));
    std::vector<double> means(n);
    for (auto& m : means) m = rng.uniform(0.0, 1.0);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto best = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
    const auto kept = kernels::screen_serial(all, means, s2, 10 + rng.below(50), 0.05, 15.0);
    CHECK(std::find(kept.begin(), kept.end(), best) != kept.end());
  }
}

TEST_CASE("KN on two zero-noise solutions finishes after the first round") {
  const auto space = SearchSpace::from_arities({2});
  ObjectiveHandle h(simopt::testing::gaussian({1.0, 0.0}, 0.0), space);
  KnConfig cfg;
  cfg.delta = 0.1;
  const auto out = run_kn(h, cfg, SeedPolicy{1});
  CHECK(out.mode == KnMode::completed);
  REQUIRE(out.winner);
  CHECK(*out.winner == 0);
  CHECK(out.evaluations_used == 20);
  CHECK(out.iterations == 10);
  CHECK_FALSE(out.tie_break);
}

TEST_CASE("KN with exact zero-noise ties uses the max-mean rule") {
  const auto space = SearchSpace::from_arities({3});
  ObjectiveHandle h(simopt::testing::gaussian({0.5, 0.7, 0.7}, 0.0), space);
  const auto out = run_kn(h, KnConfig{}, SeedPolicy{1});
  CHECK(out.mode == KnMode::completed);
  CHECK(out.tie_break);
  CHECK(*out.winner == 1);
  CHECK(out.survivors.size() == 1);
}

TEST_CASE("KN evaluation accounting is exact") {
  const auto space = SearchSpace::from_arities({10});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
    KnConfig cfg;
    cfg.exec = seed % 2 ? Execution::serial : Execution::parallel;
    const auto out = run_kn(h, cfg, SeedPolicy{seed});
    CHECK(out.evaluations_used == h.evaluations());
    std::uint64_t expected = 10 * cfg.r0;
    for (std::size_t i = 0; i + 1 < out.survivor_counts.size(); ++i) expected += out.survivor_counts[i];
    CHECK(out.evaluations_used == expected);
    for (std::size_t i = 1; i < out.survivor_counts.size(); ++i)
      CHECK(out.survivor_counts[i] <= out.survivor_counts[i - 1]);
    CHECK(out.survivors.size() == 1);
    CHECK(out.survivors[0].count == out.iterations);
  }
}

TEST_CASE("KN budget mode with budget K*R0 stops after the first screen") {
  const auto space = SearchSpace::from_arities({10});
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
  KnConfig cfg;
  cfg.budget = 100;
  const auto out = run_kn(h, cfg, SeedPolicy{4});
  CHECK(out.evaluations_used == 100);
  REQUIRE(out.survivor_counts.size() == 1);
  CHECK(out.survivors.size() == out.survivor_counts[0]);
  CHECK(out.mode == (out.survivors.size() == 1 ? KnMode::completed : KnMode::budget_exhausted));
  for (const auto& s : out.survivors) CHECK(s.count == 10);
}

TEST_CASE("KN budget mode never overspends") {
  const auto space = SearchSpace::from_arities({10});
  for (std::uint64_t budget : {10u, 35u, 100u, 150u, 333u}) {
    ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
    KnConfig cfg;
    cfg.budget = budget;
    const auto out = run_kn(h, cfg, SeedPolicy{budget});
    CHECK(out.evaluations_used <= budget);
    CHECK(h.evaluations() == out.evaluations_used);
    CHECK_FALSE(out.survivors.empty());
  }
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
  KnConfig cfg;
  cfg.budget = 9;
  CHECK_THROWS_AS(run_kn(h, cfg, SeedPolicy{1}), ConfigError);
}

TEST_CASE("KN is deterministic across execution modes") {
  const auto space = SearchSpace::from_arities({10});
  ObjectiveHandle a(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
  ObjectiveHandle b(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.05), space);
  KnConfig serial, parallel;
  serial.exec = Execution::serial;
  std::vector<std::string> ta, tb;
  a.set_sink([&](const Observation& o) { ta.push_back(std::to_string(o.solution_id) + ":" + std::to_string(o.seed)); });
  b.set_sink([&](const Observation& o) { tb.push_back(std::to_string(o.solution_id) + ":" + std::to_string(o.seed)); });
  const auto x = run_kn(a, serial, SeedPolicy{12});
  const auto y = run_kn(b, parallel, SeedPolicy{12});
  CHECK(x.winner == y.winner);
  CHECK(x.evaluations_used == y.evaluations_used);
  CHECK(ta == tb);
}

TEST_CASE("KN on a candidate subset") {
  const auto space = SearchSpace::from_arities({10});
  ObjectiveHandle h(simopt::testing::gaussian(simopt::testing::kn_ten_means(), 0.0), space);
  const std::vector<SolutionId> cands{3, 7, 0};
  const auto out = run_kn_on(h, cands, KnConfig{}, SeedPolicy{2});
  CHECK(*out.winner == 0);
  CHECK(out.evaluations_used == 30);
  CHECK_THROWS_AS(run_kn_on(h, std::vector<SolutionId>{4}, KnConfig{}, SeedPolicy{2}), TrivialProblemError);
}

TEST_CASE("KN objective failure aborts with partial state") {
  const auto space = SearchSpace::from_arities({5});
  ObjectiveHandle h(std::make_shared<FailingObjective>(), space);
  KnConfig cfg;
  cfg.exec = Execution::serial;
  try {
    run_kn(h, cfg, SeedPolicy{1});
    FAIL("expected KnAborted");
  } catch (const KnAborted& e) {
    CHECK(e.partial().survivors.size() == 5);
    CHECK(e.cause() != nullptr);
  }
}

TEST_CASE("KN config validation") {
  KnConfig cfg;
  cfg.delta = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.r0 = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.p = 1.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
