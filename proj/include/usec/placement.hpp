#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace usec {

/// Which sub-matrices each machine stores (Z_n), with the inverse map
/// (N_g) precomputed. Indices are 0-based; text formats and reports are
/// 1-based.
///
/// Invariant: every sub-matrix is stored by exactly `replication()`
/// distinct machines. A machine may store nothing.
class StoragePlacement {
 public:
  StoragePlacement(std::size_t machines, std::size_t submatrices, std::size_t replication,
                   std::vector<std::vector<std::size_t>> stored_by_machine);

  std::size_t machines() const noexcept { return store_.size(); }
  std::size_t submatrices() const noexcept { return holders_.size(); }
  std::size_t replication() const noexcept { return replication_; }

  /// Z_n, ascending.
  const std::vector<std::size_t>& stored_by(std::size_t machine) const { return store_.at(machine); }
  /// N_g, ascending.
  const std::vector<std::size_t>& holders(std::size_t submatrix) const { return holders_.at(submatrix); }
  bool stores(std::size_t machine, std::size_t submatrix) const;

  /// Serializes to the line-oriented placement file format.
  std::string to_text() const;

  friend bool operator==(const StoragePlacement&, const StoragePlacement&) = default;

 private:
  std::size_t replication_;
  std::vector<std::vector<std::size_t>> store_;
  std::vector<std::vector<std::size_t>> holders_;
};

/// Machines split into N/J groups of J consecutive machines; group i stores
/// the i-th block of G/(N/J) consecutive sub-matrices.
StoragePlacement repetition_placement(std::size_t machines, std::size_t submatrices,
                                      std::size_t replication);

/// G = N; machine n stores sub-matrices n, n+1, ..., n+J-1 (mod N).
StoragePlacement cyclic_placement(std::size_t machines, std::size_t replication);

inline constexpr std::size_t kDefaultManSubmatrixCap = 100000;

/// One sub-matrix per J-subset of machines, subsets in lexicographic order,
/// so G = C(N, J).
StoragePlacement man_placement(std::size_t machines, std::size_t replication,
                               std::size_t max_submatrices = kDefaultManSubmatrixCap);

/// Parses the placement file format:
///
///     # comment
///     N G J
///     1: 1 2 3
///     2: 1 2 3
///     ...
///
/// Every machine 1..N must appear exactly once; an empty list is allowed.
/// Throws ParseError (with line/column) or ValidationError.
StoragePlacement parse_placement(std::string_view text);

StoragePlacement load_placement_file(const std::string& path);

/// n choose k, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace usec
