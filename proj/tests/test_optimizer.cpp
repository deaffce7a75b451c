#include "oracles.hpp"

#include "usec/errors.hpp"
#include "usec/optimizer.hpp"

#include <doctest.h>

#include <random>

using namespace usec;
using usec::testing::cut_enumeration_optimum;
using usec::testing::random_instance;

namespace {

const SpeedVector kPowers{1, 2, 4, 8, 16, 32};

AssignmentProblem single_block(std::initializer_list<double> speeds, std::size_t s = 0) {
  const std::size_t n = speeds.size();
  return {repetition_placement(n, 1, n), SpeedVector(speeds), AvailableSet::all(n), s};
}

}  // namespace

TEST_CASE("proportional split over one block") {
  const auto opt = solve(single_block({1, 3}));
  CHECK(opt.c_star == Rational(1, 4));
  CHECK(opt.exact);
  CHECK(opt.loads(0, 0) == Rational(1, 4));
  CHECK(opt.loads(0, 1) == Rational(3, 4));
}

TEST_CASE("worked examples") {
  const auto all = AvailableSet::all(6);
  const auto cyc = solve({cyclic_placement(6, 3), kPowers, all, 0});
  CHECK(cyc.c_star == Rational(1, 7));
  CHECK(cyc.certificate.submatrices == std::vector<std::size_t>{2});
  CHECK(cyc.certificate.machines == std::vector<std::size_t>{0, 1, 2});

  const auto rep = solve({repetition_placement(6, 6, 3), kPowers, all, 0});
  CHECK(rep.c_star == Rational(3, 7));

  const auto man = solve({man_placement(6, 3), kPowers, all, 0});
  CHECK(man.c_star > 0);
}

TEST_CASE("certificates below and at the optimum") {
  const auto all = AvailableSet::all(6);
  const AssignmentProblem cyc{cyclic_placement(6, 3), kPowers, all, 0};
  const Rational below = Rational(1, 7) - Rational(1, 1000000);
  CHECK_FALSE(is_feasible(cyc, below));
  auto cert = min_cut_certificate(cyc, below);
  CHECK(cert.submatrices == std::vector<std::size_t>{2});
  CHECK(cert.machines == std::vector<std::size_t>{0, 1, 2});
  CHECK(cert.cut_edges == 0);
  REQUIRE(cert.bound);
  CHECK(*cert.bound == Rational(1, 7));

  const AssignmentProblem rep{repetition_placement(6, 6, 3), kPowers, all, 0};
  cert = min_cut_certificate(rep, Rational(3, 7) - Rational(1, 1000000));
  CHECK(cert.submatrices == std::vector<std::size_t>{0, 1, 2});
  CHECK(cert.machines == std::vector<std::size_t>{0, 1, 2});
  CHECK(*cert.bound == Rational(3, 7));

  cert = min_cut_certificate(rep, Rational(3, 7));
  REQUIRE(cert.bound);
  CHECK(*cert.bound == Rational(3, 7));

  CHECK_THROWS_AS(min_cut_certificate(rep, Rational(1)), ValidationError);
}

TEST_CASE("structural infeasibility names the block") {
  const AssignmentProblem p{repetition_placement(4, 2, 2), SpeedVector{1, 1, 1, 1}, AvailableSet(4, {0, 1, 2}), 1};
  try {
    solve(p);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.submatrix() == 1);
  }
  const auto cert = min_cut_certificate(p, Rational(1000));
  CHECK(cert.submatrices == std::vector<std::size_t>{1});
  CHECK(cert.machines.empty());
  CHECK_FALSE(cert.bound);
}

TEST_CASE("full replication has a closed form") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const std::size_t g = 1 + rng() % 4;
    std::vector<Rational> s;
    Rational sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      s.emplace_back(static_cast<long>(1 + rng() % 9), static_cast<long>(1 + rng() % 3));
      sum += s.back();
    }
    // S = 0: c* = G / sum(s) as long as no machine would exceed load 1 per block
    const AssignmentProblem p{repetition_placement(n, g, n), SpeedVector(s), AvailableSet::all(n), 0};
    const auto opt = solve(p);
    CHECK(opt.c_star == Rational(static_cast<long>(g)) / sum);
  }
}

TEST_CASE("solutions satisfy the constraints exactly") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_instance(rng);
    for (bool balanced : {false, true}) {
      SolveOptions options;
      options.balanced = balanced;
      const auto opt = solve(p, options);
      CHECK(validate_load_matrix(opt.loads, p.placement, p.available, p.stragglers).empty());
      CHECK(computation_time(opt.loads, p.speeds, p.available) <= opt.c_star);
      CHECK(opt.exact);
      const auto exact = cut_enumeration_optimum(p);
      REQUIRE(exact);
      CHECK(opt.c_star == *exact);
      REQUIRE(opt.certificate.bound);
      CHECK(*opt.certificate.bound == opt.c_star);
    }
  }
}

TEST_CASE("balanced solutions give every reachable machine load") {
  const auto all = AvailableSet::all(6);
  SolveOptions options;
  options.balanced = true;
  const auto opt = solve({repetition_placement(6, 6, 3), kPowers, all, 0}, options);
  CHECK(opt.c_star == Rational(3, 7));
  const auto mu = load_vector(opt.loads);
  for (std::size_t n = 0; n < 6; ++n) CHECK(mu[n] > 0);
  // the second group is balanced at level 3/56
  for (std::size_t n = 3; n < 6; ++n) CHECK(opt.levels[n] == Rational(3, 56));
}

TEST_CASE("feasibility is monotone in c") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_instance(rng);
    const auto c = solve(p).c_star;
    for (int k = 1; k <= 4; ++k) {
      CHECK_FALSE(is_feasible(p, c * Rational(k, k + 1)));
      CHECK(is_feasible(p, c * Rational(k + 1, k)));
    }
    CHECK(is_feasible(p, c));
  }
}

TEST_CASE("more redundancy is never faster, more machines never slower") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    testing::RandomInstanceLimits limits;
    limits.max_stragglers = 0;
    auto p = random_instance(rng, limits);
    const auto c0 = solve(p).c_star;
    if (p.placement.replication() >= 2) {
      bool live = true;
      for (std::size_t g = 0; g < p.placement.submatrices(); ++g) {
        std::size_t count = 0;
        for (std::size_t n : p.placement.holders(g)) count += p.available.contains(n);
        live = live && count >= 2;
      }
      if (live) {
        auto q = p;
        q.stragglers = 1;
        CHECK(solve(q).c_star >= c0);
      }
    }
    auto more = p;
    more.available = AvailableSet::all(p.placement.machines());
    CHECK(solve(more).c_star <= c0);
  }
}

TEST_CASE("grid oracle examples") {
  CHECK(to_double(brute_force_oracle(single_block({1, 1}), 100)) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(to_double(brute_force_oracle(single_block({1, 3}), 100)) == doctest::Approx(0.25).epsilon(0.04));
  const AssignmentProblem rep{repetition_placement(6, 6, 3), kPowers, AvailableSet::all(6), 0};
  CHECK(std::abs(to_double(brute_force_oracle(rep, 100)) - 3.0 / 7.0) <= 0.01);
  CHECK_THROWS_AS(brute_force_oracle({man_placement(7, 3), SpeedVector(std::vector<Rational>(7, 1)),
                                      AvailableSet::all(7), 0},
                                     10),
                  SizeCapError);
}

TEST_CASE("grid sweep agrees with literal enumeration") {
  std::mt19937_64 rng(21);
  testing::RandomInstanceLimits limits;
  limits.max_machines = 4;
  limits.max_submatrices = 2;
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_instance(rng, limits);
    for (std::size_t k : {4u, 7u, 10u}) {
      const auto swept = brute_force_oracle(p, k);
      const auto listed = grid_enumeration_oracle(p, k);
      CHECK(swept == listed);
      CHECK(swept >= solve(p).c_star);
    }
  }
}

TEST_CASE("grid oracle brackets the optimum") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_instance(rng);
    const auto c = solve(p).c_star;
    const auto grid = brute_force_oracle(p, 100);
    CHECK(grid >= c);
    CHECK(to_double(grid - c) <= 1e-2);
  }
}
