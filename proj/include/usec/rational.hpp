#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace usec {

/// Exact rational backed by GMP. Loads, row-sum constraints and optimizer
/// probes are all carried in this type; doubles appear only at reporting
/// boundaries.
using Rational = boost::multiprecision::mpq_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rational from_double(double x) { return Rational(x); }

/// Parses "3", "-2/7", "0.125" or "1e-3". Decimal forms are converted
/// exactly from their decimal expansion, not through binary floating point.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& r);

}  // namespace usec
