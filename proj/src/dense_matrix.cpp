#include "usec/dense_matrix.hpp"

#include "usec/errors.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace usec {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix DenseMatrix::identity(std::size_t size) {
  DenseMatrix m(size, size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::uniform_symmetric(std::size_t size, std::uint64_t seed) {
  DenseMatrix m(size, size);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i; j < size; ++j) {
      // 53 random bits -> [0, 1)
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m(i, j) = u;
      m(j, i) = u;
    }
  }
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

DenseMatrix DenseMatrix::load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file '" + path + "'");
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows == 0 || cols == 0) throw Error("matrix file '" + path + "' lacks a 'rows cols' header");
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw Error("matrix file '" + path + "' ends early");
    }
  }
  return m;
}

bool DenseMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

double row_dot(const DenseMatrix& x, std::size_t i, std::span<const double> w) {
  const auto row = x.row(i);
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) sum += row[j] * w[j];
  return sum;
}

std::vector<double> multiply(const DenseMatrix& x, std::span<const double> w) {
  if (w.size() != x.cols()) throw ValidationError("vector length does not match matrix columns");
  std::vector<double> y(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) y[i] = row_dot(x, i, w);
  return y;
}

double euclidean_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace usec
