#pragma once

#include "usec/core_model.hpp"
#include "usec/rational.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace usec {

/// Half-open range of row indices inside one sub-matrix, 0-based.
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// A row set M_{g,f} and the machines P_{g,f} that each compute all of it.
struct RowTask {
  RowRange rows;
  std::vector<std::size_t> machines;
  friend bool operator==(const RowTask&, const RowTask&) = default;
};

/// Task layout for one sub-matrix. `alphas` and `fill_sets` are the exact
/// fractional output of the filling procedure (one entry per iteration);
/// `tasks` is their realization as integer row ranges with empty ranges
/// dropped.
struct SubAssignment {
  std::size_t submatrix = 0;
  std::size_t rows = 0;
  std::vector<Rational> alphas;
  std::vector<std::vector<std::size_t>> fill_sets;
  std::vector<RowTask> tasks;

  /// F_g after row discretization.
  std::size_t row_sets() const { return tasks.size(); }
};

struct ComputationAssignment {
  std::size_t machines = 0;
  std::size_t rows_per_submatrix = 0;
  std::vector<SubAssignment> subs;
};

/// Heterogeneous filling for one sub-matrix. `loads[n]` is mu[g][n] for every
/// machine; the loads must be non-negative, at most 1, sum to exactly
/// `redundancy`, and have at least `redundancy` positive entries.
///
/// Each iteration picks the machine with the smallest positive remaining load
/// together with the redundancy-1 largest, and gives them a common share
/// alpha that keeps every remaining load at most (remaining total)/redundancy.
/// Ties in the sort are broken by ascending machine index. Throws
/// ValidationError on bad input.
SubAssignment fill_submatrix(std::span<const Rational> loads, std::size_t redundancy,
                             std::size_t rows, std::size_t submatrix = 0);

/// Equal-share cyclic layout over `holders` machines numbered 0..holders-1:
/// row set f goes to machines f, f+1, ..., f+S (mod holders). When holders
/// does not divide rows, the first rows % holders sets get one extra row.
SubAssignment homogeneous_cyclic(std::size_t holders, std::size_t stragglers, std::size_t rows,
                                 std::size_t submatrix = 0);

/// Splits `rows` into consecutive ranges proportional to `alphas` (which
/// must sum to 1) by rounding cumulative boundaries; the ranges cover all
/// rows exactly.
std::vector<RowRange> partition_rows(std::span<const Rational> alphas, std::size_t rows);

/// Runs fill_submatrix on every row of an optimal load matrix.
ComputationAssignment assign_heterogeneous(const LoadMatrix& loads, std::size_t stragglers,
                                           std::size_t rows_per_submatrix);

/// homogeneous_cyclic for every sub-matrix over its available holders.
ComputationAssignment assign_homogeneous(const StoragePlacement& placement, const AvailableSet& available,
                                         std::size_t stragglers, std::size_t rows_per_submatrix);

/// mu[g][n] = |T_{g,n}| / (q/G) from the realized row ranges.
LoadMatrix assignment_to_load_matrix(const ComputationAssignment& assignment);

/// mu[g][n] = sum of alpha over fill sets containing n (no rounding).
LoadMatrix fractional_load_matrix(const ComputationAssignment& assignment);

/// Rows computed per machine, summed over sub-matrices.
std::vector<std::size_t> rows_per_machine(const ComputationAssignment& assignment);

struct StragglerCounterexample {
  std::vector<std::size_t> stragglers;
  std::size_t submatrix;
  std::size_t task;
};

inline constexpr std::size_t kDefaultStragglerSubsetCap = 1'000'000;

/// Tries every S-subset of the available machines and reports the first
/// one that leaves some row set with no responding machine.
std::optional<StragglerCounterexample> verify_straggler_tolerance(
    const ComputationAssignment& assignment, std::size_t stragglers, const AvailableSet& available,
    std::size_t subset_cap = kDefaultStragglerSubsetCap);

/// Structural checks: row sets partition each sub-matrix, every machine set
/// has 1+S distinct available holders. Returns human-readable problems.
std::vector<std::string> validate_assignment(const ComputationAssignment& assignment,
                                             const StoragePlacement& placement,
                                             const AvailableSet& available, std::size_t stragglers);

/// Assignment dump, one task per line, 1-based, inclusive row bounds:
///
///     # usec-assignment machines=6 submatrices=6 rows_per_submatrix=100
///     g,f,row_start,row_end,machines
///     1,1,1,43,1
///     ...
void write_assignment_csv(std::ostream& out, const ComputationAssignment& assignment);
ComputationAssignment parse_assignment_csv(std::string_view text);

}  // namespace usec
