#pragma once

#include "usec/core_model.hpp"
#include "usec/placement.hpp"
#include "usec/rational.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace usec {

/// One instance of the relaxed min-max load problem: minimize c(M) subject
/// to every sub-matrix's loads over its available holders summing to 1+S,
/// entries in [0,1].
struct AssignmentProblem {
  StoragePlacement placement;
  SpeedVector speeds;
  AvailableSet available;
  std::size_t stragglers = 0;

  std::size_t redundancy() const { return stragglers + 1; }
};

/// A cut of the transportation network. Sub-matrices in `submatrices`
/// demand (1+S) each; they can reach machines outside `machines` only over
/// `cut_edges` unit-capacity edges, so any feasible time c satisfies
///
///     (1+S)|A| - cut_edges <= c * sum_{n in B} s[n].
///
/// `bound` is the smallest c allowed by that inequality; it is empty when B
/// has no speed, i.e. the cut is violated at every c.
struct CutCertificate {
  std::vector<std::size_t> submatrices;
  std::vector<std::size_t> machines;
  std::size_t cut_edges = 0;
  std::optional<Rational> bound;
};

struct Optimum {
  Rational c_star;
  LoadMatrix loads;
  CutCertificate certificate;
  /// True when c_star was pinned exactly by a tight cut; otherwise c_star is
  /// a feasible upper bound within the requested tolerance.
  bool exact = false;
  std::size_t probes = 0;
  /// Per-machine finish-time level of the balanced solution (empty unless
  /// SolveOptions::balanced). Machine n carries at most levels[n] * s[n].
  std::vector<Rational> levels;
};

struct SolveOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 200;
  /// Lexicographically balance non-bottleneck machines instead of
  /// returning the first max-flow found at c*.
  bool balanced = false;
};

/// Throws InfeasibleError naming the first sub-matrix with fewer than 1+S
/// available holders.
void check_structural_feasibility(const AssignmentProblem& problem);

/// Exact feasibility of time c via max flow.
bool is_feasible(const AssignmentProblem& problem, const Rational& c);

/// Minimum computation time and an optimal load matrix.
Optimum solve(const AssignmentProblem& problem, const SolveOptions& options = {});

/// For infeasible c: the inclusion-minimal violated cut. For c = c*: the
/// inclusion-maximal tight cut. Throws ValidationError if c has slack.
CutCertificate min_cut_certificate(const AssignmentProblem& problem, const Rational& c);

inline constexpr std::size_t kOracleMaxMachines = 6;
inline constexpr std::size_t kOracleMaxSubmatrices = 6;
inline constexpr std::size_t kOracleEnumerationCap = 2'000'000;

/// Minimum of c(M) over load matrices whose entries are multiples of
/// 1/grid_steps. This is a feasible point of the continuous problem, so the
/// result is an upper bound on c* that converges as grid_steps grows.
///
/// Grids with at most kOracleEnumerationCap matrices are enumerated
/// directly. Larger grids sweep the candidate objective values and decide
/// each one by checking every sub-matrix subset against integral
/// transportation capacity, which has the same minimum.
Rational brute_force_oracle(const AssignmentProblem& problem, std::size_t grid_steps);

/// Same as brute_force_oracle but always enumerates matrices; throws
/// SizeCapError above `cap`.
Rational grid_enumeration_oracle(const AssignmentProblem& problem, std::size_t grid_steps,
                                 std::size_t cap = kOracleEnumerationCap);

}  // namespace usec
