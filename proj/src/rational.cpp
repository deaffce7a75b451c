#include "usec/rational.hpp"

#include "usec/errors.hpp"

#include <cctype>
#include <string>

namespace usec {

namespace {

using Integer = boost::multiprecision::mpz_int;

Integer parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw Error("malformed number '" + std::string(whole) + "'");
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) throw Error("malformed number '" + std::string(whole) + "'");
  }
  return Integer(std::string(digits));
}

Integer pow10(long exponent) {
  Integer result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(text.substr(0, slash), whole);
    Integer den = parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw Error("zero denominator in '" + std::string(whole) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = text.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (exp_text.empty() || exp_text.size() > 6) throw Error("malformed exponent in '" + std::string(whole) + "'");
      exponent = parse_integer(exp_text, whole).convert_to<long>();
      if (exp_negative) exponent = -exponent;
      text = text.substr(0, e);
    }
    std::string digits;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
      std::string_view frac = text.substr(dot + 1);
      digits = std::string(text.substr(0, dot)) + std::string(frac);
      exponent -= static_cast<long>(frac.size());
    } else {
      digits = std::string(text);
    }
    Integer mantissa = parse_integer(digits, whole);
    value = exponent >= 0 ? Rational(mantissa * pow10(exponent)) : Rational(mantissa, pow10(-exponent));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& r) { return r.str(); }

}  // namespace usec
