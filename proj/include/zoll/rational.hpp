#pragma once

// Rational recognition for floating-point inputs via continued fractions
// with a bounded denominator. "Undecided" is a first-class verdict: exact
// irrationality is undecidable in floating point, so a number is declared
// rational only when its expansion shows the characteristic termination jump
// (a huge partial quotient), irrational only when the expansion runs past
// the denominator bound without one, and undecided in between.

#include <cmath>
#include <cstdint>

#include "zoll/types.hpp"

namespace zoll {

struct RationalVerdict {
  enum class Kind { Rational, Irrational, Undecided } kind =
      Kind::Undecided;
  std::int64_t num = 0;
  std::int64_t den = 1;

  bool rational() const { return kind == Kind::Rational; }
};

/// Recognize x >= 0. `den_bound` caps admissible denominators; `tol` is the
/// accuracy to which x is trusted.
inline RationalVerdict recognize_rational(double x, std::int64_t den_bound,
                                          double tol = 1e-9) {
  if (!(x >= 0) || !std::isfinite(x))
    throw Error("recognize_rational: need a finite non-negative input");
  const double jump_rational = 1e7;  // termination-scale partial quotient
  const double jump_ambiguous = 1e3;

  // convergents p/q of the continued fraction of x
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p = static_cast<std::int64_t>(std::floor(x)), q = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    double err = std::abs(x - static_cast<double>(p) / static_cast<double>(q));
    if (err <= tol) {
      // candidate: inspect the next partial quotient
      double a_next = frac > 0 ? 1.0 / frac : std::numeric_limits<double>::infinity();
      if (a_next >= jump_rational)
        return {RationalVerdict::Kind::Rational, p, q};
      if (a_next >= jump_ambiguous)
        return {RationalVerdict::Kind::Undecided, p, q};
      // plausible but unconfirmed: keep expanding
    }
    if (frac <= 0) return {RationalVerdict::Kind::Rational, p, q};
    double inv = 1.0 / frac;
    double a_f = std::floor(inv);
    if (a_f > 9.2e18) return {RationalVerdict::Kind::Rational, p, q};
    std::int64_t a = static_cast<std::int64_t>(a_f);
    frac = inv - a_f;
    std::int64_t p_next = a * p + p_prev;
    std::int64_t q_next = a * q + q_prev;
    if (q_next > den_bound || q_next <= 0)
      return {RationalVerdict::Kind::Irrational, 0, 1};
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
  }
  return {RationalVerdict::Kind::Undecided, p, q};
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  return a / gcd64(a, b) * b;
}

}  // namespace zoll
