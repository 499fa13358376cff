#pragma once

// Domain-checked elementary functions over the two scalar rings (plain
// floating point and Jet). Expression evaluation is written once against
// this overload set.

#include "biconf/error.hpp"
#include "biconf/jet.hpp"

#include <cmath>
#include <concepts>
#include <cstdlib>
#include <numeric>

namespace biconf::ops {

template <class S>
S pow_integer(const S& x, long n);

inline Jet sin(const Jet& x) { return biconf::sin(x); }
inline Jet cos(const Jet& x) { return biconf::cos(x); }
inline Jet tan(const Jet& x) { return biconf::tan(x); }
inline Jet exp(const Jet& x) { return biconf::exp(x); }
inline Jet log(const Jet& x) { return biconf::log(x); }
inline Jet sqrt(const Jet& x) { return biconf::sqrt(x); }
inline Jet divide(const Jet& a, const Jet& b) { return a / b; }
inline Jet pow_rational(const Jet& x, long num, long den) {
  if (den == 1) return pow_integer(x, num);
  return biconf::pow_rational(x, num, den);
}

template <std::floating_point T>
T sin(T x) { return std::sin(x); }
template <std::floating_point T>
T cos(T x) { return std::cos(x); }
template <std::floating_point T>
T exp(T x) { return std::exp(x); }

template <std::floating_point T>
T tan(T x) {
  T c = std::cos(x);
  if (c == T(0)) throw DomainError("tan: argument at a pole");
  return std::sin(x) / c;
}

template <std::floating_point T>
T log(T x) {
  if (!(x > T(0))) throw DomainError("log of nonpositive value");
  return std::log(x);
}

template <std::floating_point T>
T sqrt(T x) {
  if (x < T(0)) throw DomainError("sqrt of negative value");
  return std::sqrt(x);
}

template <std::floating_point T>
T divide(T a, T b) {
  if (b == T(0)) throw DomainError("division by zero");
  return a / b;
}

/// x^n by binary powering; n may be negative.
template <class S>
S pow_integer(const S& x, long n) {
  if (n < 0) {
    S p = pow_integer(x, -n);
    return divide(S(1.0), p);
  }
  S result(1.0);
  S base = x;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = result * base;
      }
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

/// Real x^(num/den), den > 0 and gcd(num, den) = 1. Odd denominators take
/// the real root of negative bases.
template <std::floating_point T>
T pow_rational(T x, long num, long den) {
  if (den == 1) return pow_integer(x, num);
  if (x < T(0)) {
    if (den % 2 == 0) throw DomainError("even root of negative value");
    T mag = std::pow(-x, static_cast<T>(num) / static_cast<T>(den));
    return (std::labs(num) % 2 == 1) ? -mag : mag;
  }
  if (x == T(0) && num < 0) throw DomainError("zero raised to a negative power");
  return std::pow(x, static_cast<T>(num) / static_cast<T>(den));
}

}  // namespace biconf::ops
