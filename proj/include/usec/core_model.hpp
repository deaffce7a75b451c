#pragma once

#include "usec/placement.hpp"
#include "usec/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace usec {

/// Dimensions of a deployment: N machines, X split into G row blocks of
/// q/G rows each, every block replicated on J machines, S tolerated
/// stragglers.
struct ProblemDims {
  std::size_t machines = 0;
  std::size_t submatrices = 0;
  std::size_t replication = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stragglers = 0;

  /// Throws ValidationError unless 1 <= J <= N, G >= 1 and G divides q.
  void validate() const;
  std::size_t rows_per_submatrix() const { return rows / submatrices; }
};

/// s[n]: inverse of the time machine n needs for all rows of one
/// sub-matrix. Strictly positive.
class SpeedVector {
 public:
  SpeedVector() = default;
  explicit SpeedVector(std::vector<Rational> speeds);
  SpeedVector(std::initializer_list<double> speeds);
  static SpeedVector from_doubles(std::span<const double> speeds);

  std::size_t size() const noexcept { return speeds_.size(); }
  const Rational& operator[](std::size_t n) const { return speeds_[n]; }
  const std::vector<Rational>& values() const noexcept { return speeds_; }
  std::vector<double> to_doubles() const;

 private:
  std::vector<Rational> speeds_;
};

/// N_t: machines that are not preempted in the current step. Sorted,
/// non-empty subset of [0, universe).
class AvailableSet {
 public:
  AvailableSet(std::size_t universe, std::vector<std::size_t> members);
  static AvailableSet all(std::size_t universe);

  std::size_t universe() const noexcept { return universe_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(std::size_t n) const;
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const AvailableSet&, const AvailableSet&) = default;

 private:
  std::size_t universe_;
  std::vector<std::size_t> members_;
};

/// mu[g][n]: fraction of sub-matrix g's rows computed by machine n.
class LoadMatrix {
 public:
  LoadMatrix() = default;
  LoadMatrix(std::size_t submatrices, std::size_t machines);

  std::size_t submatrices() const noexcept { return submatrices_; }
  std::size_t machines() const noexcept { return machines_; }

  const Rational& operator()(std::size_t g, std::size_t n) const { return entries_[g * machines_ + n]; }
  Rational& operator()(std::size_t g, std::size_t n) { return entries_[g * machines_ + n]; }

  Rational row_sum(std::size_t g) const;
  std::vector<double> to_doubles() const;

  friend bool operator==(const LoadMatrix&, const LoadMatrix&) = default;

 private:
  std::size_t submatrices_ = 0;
  std::size_t machines_ = 0;
  std::vector<Rational> entries_;
};

/// mu[n] = sum over g of mu[g][n].
using LoadVector = std::vector<Rational>;

LoadVector load_vector(const LoadMatrix& loads);

/// c(M) = max over available n of mu[n] / s[n]. Throws ValidationError if
/// an unavailable machine carries load or the sizes disagree.
Rational computation_time(const LoadMatrix& loads, const SpeedVector& speeds,
                          const AvailableSet& available);

/// Index of a machine attaining computation_time (lowest index on ties).
std::size_t bottleneck_machine(const LoadMatrix& loads, const SpeedVector& speeds,
                               const AvailableSet& available);

struct LoadViolation {
  enum class Kind { RowSum, OutOfRange, NotStored, Unavailable, Shape };
  Kind kind;
  std::size_t submatrix;
  std::optional<std::size_t> machine;
  std::string message;
};

/// Checks mu against the relaxed constraints: every row sums to exactly
/// 1+S over available holders, entries lie in [0,1], and entries are zero
/// for machines that do not store the block or are unavailable. Returns
/// all violations; an empty result means valid.
std::vector<LoadViolation> validate_load_matrix(const LoadMatrix& loads, const StoragePlacement& placement,
                                                const AvailableSet& available, std::size_t stragglers);

}  // namespace usec
