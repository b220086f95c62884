#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gerbes {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer factorial(unsigned n) {
  Integer r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

inline Integer binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  Integer r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

inline Rational rat(long long num, long long den = 1) { return Rational(num, den); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline Integer to_integer(const Rational& r) {
  if (!is_integer(r)) throw std::domain_error("rational is not an integer: " + r.str());
  return numerator(r);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) { return r.str(); }

// Floor of a rational, as an Integer.
inline Integer rfloor(const Rational& r) {
  Integer q = numerator(r) / denominator(r);
  if (numerator(r) < 0 && q * denominator(r) != numerator(r)) --q;
  return q;
}

// r reduced mod 1 into [0,1).
inline Rational mod1(const Rational& r) { return r - Rational(rfloor(r)); }

}  // namespace gerbes
