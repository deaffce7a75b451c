#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace usec {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is well-formed but violates an invariant of the model.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// No load assignment can satisfy the redundancy constraints. `submatrix`
/// is the 0-based index of a sub-matrix with too few available holders.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::size_t submatrix)
      : Error(what), submatrix_(submatrix) {}
  std::size_t submatrix() const noexcept { return submatrix_; }

 private:
  std::size_t submatrix_;
};

/// Text input could not be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A search or enumeration would exceed its configured size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace usec
