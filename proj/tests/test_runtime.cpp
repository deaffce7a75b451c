#include "usec/elastic_runtime.hpp"
#include "usec/errors.hpp"
#include "usec/optimizer.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace usec;

namespace {

ElasticScenario base_scenario(StoragePlacement placement, std::vector<double> speeds, std::size_t s = 0) {
  ElasticScenario sc{.placement = std::move(placement)};
  sc.true_speeds = std::move(speeds);
  sc.stragglers = s;
  sc.steps = 5;
  return sc;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * static_cast<double>(i % 7);
  return v;
}

const std::vector<double> kPowers{1, 2, 4, 8, 16, 32};

}  // namespace

TEST_CASE("ewma update") {
  const std::vector<double> s{2.0, 5.0};
  std::vector<std::optional<double>> nu{4.0, std::nullopt};
  CHECK(ewma_update(s, nu, 0.5) == std::vector<double>{3.0, 5.0});
  CHECK(ewma_update(s, nu, 1.0) == std::vector<double>{4.0, 5.0});
}

TEST_CASE("estimate error halves each step with gamma 1/2") {
  std::vector<double> truth{1, 3, 9};
  std::vector<double> est{5, 5, 5};
  std::vector<std::optional<double>> nu(truth.begin(), truth.end());
  double err = 4.0;
  for (int t = 0; t < 20; ++t) {
    est = ewma_update(est, nu, 0.5);
    double next = 0.0;
    for (std::size_t n = 0; n < 3; ++n) next = std::max(next, std::abs(est[n] - truth[n]));
    CHECK(next == doctest::Approx(err / 2));
    err = next;
  }
}

TEST_CASE("full participation reproduces the direct product") {
  auto sc = base_scenario(cyclic_placement(6, 3), kPowers);
  const auto x = DenseMatrix::uniform_symmetric(60, 3);
  MasterState master = MasterState::initial(sc, ramp(60));
  const auto step = run_time_step(master, sc, x, 1);
  CHECK(step.y == multiply(x, ramp(60)));
  CHECK(step.metrics.stragglers.empty());
}

TEST_CASE("two adversarial stragglers do not change the product") {
  auto sc = base_scenario(cyclic_placement(6, 3), kPowers, 2);
  sc.straggler_policy = {StragglerPolicy::Kind::Adversarial, 2, 0};
  sc.noise = {0.05, 17};
  const auto x = DenseMatrix::uniform_symmetric(60, 4);
  MasterState master = MasterState::initial(sc, ramp(60));
  for (std::size_t t = 1; t <= 3; ++t) {
    const auto step = run_time_step(master, sc, x, t);
    CHECK(step.y == multiply(x, ramp(60)));
    CHECK(step.metrics.stragglers == std::vector<std::size_t>{4, 5});
    for (const auto& r : step.reports) CHECK(r.machine < 4);
  }
}

TEST_CASE("random stragglers are recorded and tolerated") {
  auto sc = base_scenario(repetition_placement(6, 6, 3), kPowers, 2);
  sc.straggler_policy = {StragglerPolicy::Kind::Random, 2, 99};
  const auto x = DenseMatrix::uniform_symmetric(36, 5);
  MasterState master = MasterState::initial(sc, ramp(36));
  for (std::size_t t = 1; t <= 10; ++t) {
    const auto step = run_time_step(master, sc, x, t);
    CHECK(step.metrics.stragglers.size() == 2);
    CHECK(step.y == multiply(x, ramp(36)));
    for (const auto& r : step.reports) {
      CHECK_FALSE(std::binary_search(step.metrics.stragglers.begin(), step.metrics.stragglers.end(), r.machine));
    }
  }
}

TEST_CASE("too many stragglers make the step unrecoverable") {
  auto sc = base_scenario(repetition_placement(3, 3, 1), {1, 1, 1}, 0);
  sc.straggler_policy = {StragglerPolicy::Kind::Random, 1, 5};
  const auto x = DenseMatrix::identity(3);
  MasterState master = MasterState::initial(sc, {1, 2, 3});
  CHECK_THROWS_AS(run_time_step(master, sc, x, 1), InfeasibleError);
}

TEST_CASE("preemption re-solves over the remaining machines") {
  auto sc = base_scenario(cyclic_placement(6, 3), kPowers);
  sc.steps = 2;
  sc.timeline = {AvailableSet::all(6), AvailableSet(6, {0, 1, 2, 3, 4})};
  sc.initial_estimate = kPowers;
  sc.gamma = 1.0;
  const auto x = DenseMatrix::uniform_symmetric(60, 8);
  MasterState master = MasterState::initial(sc, ramp(60));
  const auto first = run_time_step(master, sc, x, 1);
  CHECK(first.metrics.c_estimated == Rational(1, 7));
  const auto second = run_time_step(master, sc, x, 2);
  CHECK(second.metrics.available == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(second.metrics.machine_loads[5] == 0.0);
  CHECK(second.y == multiply(x, ramp(60)));
  const auto reduced = solve({sc.placement, SpeedVector::from_doubles(kPowers), AvailableSet(6, {0, 1, 2, 3, 4}), 0});
  CHECK(to_double(second.metrics.c_estimated) == doctest::Approx(to_double(reduced.c_star)).epsilon(1e-12));
  CHECK(second.metrics.c_estimated > first.metrics.c_estimated);
}

TEST_CASE("exact estimate predicts the realized time") {
  auto sc = base_scenario(cyclic_placement(6, 3), kPowers);
  sc.initial_estimate = kPowers;
  const auto x = DenseMatrix::uniform_symmetric(6 * 840, 2);
  MasterState master = MasterState::initial(sc, std::vector<double>(x.cols(), 1.0));
  const auto step = run_time_step(master, sc, x, 1);
  CHECK(step.metrics.c_realized == doctest::Approx(to_double(step.metrics.c_estimated)).epsilon(1e-9));
}

TEST_CASE("heterogeneous plans never lose to the homogeneous layout") {
  std::mt19937_64 rng(8);
  const StoragePlacement placements[] = {repetition_placement(6, 6, 3), cyclic_placement(6, 3), man_placement(5, 2),
                                         cyclic_placement(5, 2)};
  for (const auto& p : placements) {
    for (std::size_t s = 0; s <= 1; ++s) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> estimate(p.machines());
        for (auto& v : estimate) v = 0.1 + static_cast<double>(rng() % 1000) / 100.0;
        auto sc = base_scenario(p, estimate, s);
        Rational het, hom;
        plan_step(sc, AvailableSet::all(p.machines()), estimate, 12, &het);
        sc.mode = AssignmentMode::Homogeneous;
        plan_step(sc, AvailableSet::all(p.machines()), estimate, 12, &hom);
        CHECK(het <= hom);
      }
    }
  }
}

TEST_CASE("power iteration on simple matrices") {
  SUBCASE("identity keeps the start direction") {
    auto sc = base_scenario(repetition_placement(2, 2, 1), {1, 2});
    const auto x = DenseMatrix::identity(4);
    const std::vector<double> start{3, 0, 4, 0};
    const auto run = power_iteration(x, sc, start);
    const std::vector<double> expected{0.6, 0.0, 0.8, 0.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(run.eigenvector[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    for (double e : run.nmse) CHECK(e == doctest::Approx(run.nmse.front()).epsilon(1e-12));
  }
  SUBCASE("diag(2,1) error shrinks by about four per step") {
    auto sc = base_scenario(repetition_placement(2, 2, 2), {1, 3});
    sc.steps = 10;
    const std::vector<double> d{2, 1};
    const auto x = DenseMatrix::diagonal(d);
    const auto run = power_iteration(x, sc, std::vector<double>{1, 1});
    CHECK(run.reference[0] == doctest::Approx(1.0));
    for (std::size_t k = 3; k < run.nmse.size(); ++k) {
      CHECK(run.nmse[k] / run.nmse[k - 1] == doctest::Approx(0.25).epsilon(1e-2));
    }
    CHECK(run.eigenvalue == doctest::Approx(2.0).epsilon(1e-5));
  }
  SUBCASE("non-symmetric input is rejected") {
    auto sc = base_scenario(repetition_placement(2, 2, 1), {1, 1});
    DenseMatrix x(2, 2);
    x(0, 1) = 1;
    CHECK_THROWS_AS(power_iteration(x, sc, std::vector<double>{1, 1}), ValidationError);
  }
}

TEST_CASE("straggler runs converge to the same vector") {
  auto sc = base_scenario(repetition_placement(6, 6, 3), kPowers, 2);
  sc.steps = 20;
  sc.noise = {0.05, 1};
  const auto x = DenseMatrix::uniform_symmetric(120, 6);
  const std::vector<double> start = ramp(120);
  const auto clean = power_iteration(x, sc, start);
  sc.straggler_policy = {StragglerPolicy::Kind::Random, 2, 3};
  const auto noisy = power_iteration(x, sc, start);
  CHECK(clean.eigenvector == noisy.eigenvector);
  CHECK(noisy.nmse.back() < 1e-10);
}

TEST_CASE("identical scenarios give identical traces") {
  auto sc = base_scenario(cyclic_placement(6, 3), kPowers, 1);
  sc.noise = {0.05, 4};
  sc.straggler_policy = {StragglerPolicy::Kind::Random, 1, 4};
  const auto x = DenseMatrix::uniform_symmetric(30, 1);
  const auto a = power_iteration(x, sc, ramp(30));
  const auto b = power_iteration(x, sc, ramp(30));
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].c_estimated == b.steps[t].c_estimated);
    CHECK(a.steps[t].completion_time == b.steps[t].completion_time);
    CHECK(a.steps[t].stragglers == b.steps[t].stragglers);
    CHECK(a.steps[t].speed_estimate == b.steps[t].speed_estimate);
  }
  CHECK(a.eigenvector == b.eigenvector);
}

TEST_CASE("scenario validation") {
  auto sc = base_scenario(repetition_placement(6, 6, 3), kPowers, 1);
  sc.steps = 1;
  sc.timeline = {AvailableSet(6, {0, 3, 4, 5})};
  CHECK_THROWS_AS(sc.validate(), InfeasibleError);
  sc.timeline = {AvailableSet(6, {0, 1, 3, 4})};
  CHECK_NOTHROW(sc.validate());
  sc.gamma = 0.0;
  CHECK_THROWS_AS(sc.validate(), ValidationError);
  sc.gamma = 0.5;
  sc.true_speeds = {1, 2};
  CHECK_THROWS_AS(sc.validate(), ValidationError);
}
