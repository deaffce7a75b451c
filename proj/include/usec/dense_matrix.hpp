#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace usec {

/// Row-major dense matrix of doubles. The data matrix X lives here.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);

  static DenseMatrix identity(std::size_t size);
  /// Symmetric matrix with entries drawn uniformly from [0, 1). Its
  /// Perron root dominates the rest of the spectrum by a wide margin.
  static DenseMatrix uniform_symmetric(std::size_t size, std::uint64_t seed);
  static DenseMatrix diagonal(std::span<const double> values);
  /// Whitespace-separated text: "rows cols" followed by the entries.
  static DenseMatrix load_text(const std::string& path);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  bool is_symmetric() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dot product of row i with w, accumulated in column order. Workers and the
/// direct product both go through this, so redundant copies agree bitwise.
double row_dot(const DenseMatrix& x, std::size_t i, std::span<const double> w);

std::vector<double> multiply(const DenseMatrix& x, std::span<const double> w);

double euclidean_norm(std::span<const double> v);

}  // namespace usec
