#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpdim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Natural log of a positive rational, stable for values far outside the
// double range (splits off the bit length before converting).
inline double log_rational(const Rational& q) {
  if (q <= 0) throw std::domain_error("log_rational: argument must be positive");
  auto log_big = [](const BigInt& n) {
    const auto bits = boost::multiprecision::msb(n);
    if (bits <= 900) return std::log(n.convert_to<double>());
    const unsigned shift = static_cast<unsigned>(bits) - 900;
    const BigInt reduced = n >> shift;
    return std::log(reduced.convert_to<double>()) + shift * std::log(2.0);
  };
  return log_big(boost::multiprecision::numerator(q)) -
         log_big(boost::multiprecision::denominator(q));
}

inline Rational pow_rational(const Rational& base, std::uint64_t e) {
  Rational acc = 1, b = base;
  while (e != 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

// Accepts "p/q", integers, and decimal strings ("0.3" -> 3/10).
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
    return Rational(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(BigInt(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac_len = text.size() - dot - 1;
  if (digits.empty() || digits == "-" || digits == "+")
    throw std::invalid_argument("parse_rational: malformed decimal '" + text + "'");
  BigInt den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  return Rational(BigInt(digits), den);
}

inline std::string rational_to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace cpdim
