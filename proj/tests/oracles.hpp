#pragma once

// Test-only reference implementations. Nothing here shares code with the
// max-flow solver.

#include "usec/core_model.hpp"
#include "usec/optimizer.hpp"
#include "usec/placement.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace usec::testing {

// c* by cut enumeration. For a set A of sub-matrices let d_A(n) be the
// number of blocks in A held by available machine n. Time c is feasible iff
// for every non-empty A
//
//     sum_n min(c * s[n], d_A(n)) >= (1+S) |A|,
//
// so c* is the largest per-A threshold. Returns nullopt when some A cannot
// be covered at any c.
inline std::optional<Rational> cut_enumeration_optimum(const AssignmentProblem& p) {
  const std::size_t g_count = p.placement.submatrices();
  const std::size_t n_count = p.placement.machines();
  const Rational demand_unit(static_cast<long>(p.redundancy()));
  Rational best = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << g_count); ++mask) {
    std::vector<long> d(n_count, 0);
    long size = 0;
    for (std::size_t g = 0; g < g_count; ++g) {
      if (!(mask >> g & 1)) continue;
      ++size;
      for (std::size_t n : p.placement.holders(g)) {
        if (p.available.contains(n)) ++d[n];
      }
    }
    const Rational demand = demand_unit * size;
    // f(c) = sum_n min(c s_n, d_n) is piecewise linear; walk its breakpoints.
    std::vector<std::size_t> order;
    long total = 0;
    for (std::size_t n = 0; n < n_count; ++n) {
      if (d[n] > 0) {
        order.push_back(n);
        total += d[n];
      }
    }
    if (Rational(total) < demand) return std::nullopt;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return Rational(d[a]) / p.speeds[a] < Rational(d[b]) / p.speeds[b];
    });
    Rational saturated = 0;  // sum of d over machines already capped
    Rational slope = 0;      // sum of s over machines not yet capped
    for (std::size_t n : order) slope += p.speeds[n];
    for (std::size_t n : order) {
      const Rational knee = Rational(d[n]) / p.speeds[n];
      if (saturated + knee * slope >= demand) {
        best = std::max(best, Rational((demand - saturated) / slope));
        break;
      }
      saturated += d[n];
      slope -= p.speeds[n];
    }
  }
  return best;
}

struct RandomInstanceLimits {
  std::size_t max_machines = 5;
  std::size_t max_submatrices = 4;
  std::size_t max_stragglers = 1;
  double min_speed = 1.0;
  double max_speed = 8.0;
  bool drop_machines = true;
};

// Random feasible instance: each block gets J random distinct holders, and
// some machines may be preempted as long as every block keeps 1+S.
inline AssignmentProblem random_instance(std::mt19937_64& rng, const RandomInstanceLimits& limits = {}) {
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
  };
  for (;;) {
    const std::size_t s_count = uniform_int(0, limits.max_stragglers);
    const std::size_t n_count = uniform_int(std::max<std::size_t>(2, s_count + 1), limits.max_machines);
    const std::size_t g_count = uniform_int(1, limits.max_submatrices);
    const std::size_t j = uniform_int(s_count + 1, n_count);

    std::vector<std::vector<std::size_t>> store(n_count);
    std::vector<std::size_t> machines(n_count);
    for (std::size_t n = 0; n < n_count; ++n) machines[n] = n;
    for (std::size_t g = 0; g < g_count; ++g) {
      std::shuffle(machines.begin(), machines.end(), rng);
      for (std::size_t k = 0; k < j; ++k) store[machines[k]].push_back(g);
    }
    StoragePlacement placement(n_count, g_count, j, store);

    std::vector<std::size_t> avail;
    for (std::size_t n = 0; n < n_count; ++n) {
      if (!limits.drop_machines || rng() % 5 != 0) avail.push_back(n);
    }
    if (avail.empty()) continue;
    AvailableSet available(n_count, avail);
    bool ok = true;
    for (std::size_t g = 0; g < g_count; ++g) {
      std::size_t live = 0;
      for (std::size_t n : placement.holders(g)) live += available.contains(n);
      ok = ok && live >= s_count + 1;
    }
    if (!ok) continue;

    // Speeds on a 1/16 grid keep the rationals small.
    std::vector<Rational> speeds;
    for (std::size_t n = 0; n < n_count; ++n) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double v = limits.min_speed + (limits.max_speed - limits.min_speed) * u;
      speeds.emplace_back(static_cast<long>(v * 16), 16);
      if (speeds.back() <= 0) speeds.back() = Rational(1, 16);
    }
    return AssignmentProblem{placement, SpeedVector(speeds), available, s_count};
  }
}

}  // namespace usec::testing
