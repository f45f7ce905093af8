#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "gd/errors.hpp"

namespace gd {

// Exact rational scalar for the Cartan engine and DSL literals.  Backed by
// boost::multiprecision::cpp_rational, which keeps values in canonical form
// (positive denominator, gcd(num, den) = 1).
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer rat_num(const Rational& r) { return numerator(r); }
inline Integer rat_den(const Rational& r) { return denominator(r); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rational_from(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw EvalError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Rational(num, den);
}

/// Parses "3", "-3", "3/4" or a decimal like "2.5" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  auto bad = [&]() -> Rational {
    throw EvalError("invalid rational literal '" + text + "'");
  };
  if (text.empty()) return bad();
  std::size_t pos = 0;
  bool neg = false;
  if (text[pos] == '-' || text[pos] == '+') {
    neg = text[pos] == '-';
    ++pos;
  }
  if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return bad();
  Integer num = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    num = num * 10 + (text[pos] - '0');
    ++pos;
  }
  Integer den = 1;
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return bad();
    den = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      den = den * 10 + (text[pos] - '0');
      ++pos;
    }
    if (den == 0) return bad();
  } else if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      num = num * 10 + (text[pos] - '0');
      den *= 10;
      ++pos;
    }
  }
  if (pos != text.size()) return bad();
  Rational r(num, den);
  return neg ? Rational(-r) : r;
}

inline std::string to_string(const Rational& r) {
  std::string s = rat_num(r).str();
  if (rat_den(r) != 1) s += "/" + rat_den(r).str();
  return s;
}

}  // namespace gd
