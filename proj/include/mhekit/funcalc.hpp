#pragma once

#include <optional>

#include "mhekit/errors.hpp"

namespace mhekit {

// Class-K function restricted to the power family: k(s) = c * s^a with c > 0,
// a > 0. Closed under composition and positive scaling, which is what the
// stability calculus needs.
struct PowerK {
  double c = 1.0;
  double a = 1.0;

  PowerK() = default;
  PowerK(double c_, double a_);

  double operator()(double s) const;

  // Inverse as a power function: k^{-1}(r) = (r/c)^{1/a}.
  double inverse(double r) const;
  PowerK inverse_fn() const;

  // this(inner(s)) as a power function.
  PowerK compose(const PowerK& inner) const;

  // s -> k(m * s), m > 0.
  PowerK scale_arg(double m) const;
  // s -> m * k(s), m > 0.
  PowerK scale_val(double m) const;
};

enum class DecayFamily { Exponential, Rational };

// Class-L decay, one of two parametric families:
//   Exponential: l(t) = b^t        with 0 < b < 1
//   Rational:    l(t) = (t+1)^-b   with b > 0
struct DecayL {
  DecayFamily family = DecayFamily::Exponential;
  double b = 0.5;

  static DecayL exponential(double b);
  static DecayL rational(double b);

  double operator()(double t) const;

  // l(t)^e within the same family (exponential: b^e; rational: b*e).
  DecayL pow(double e) const;
};

// Product-form K*L bound: (s, t) -> k(s) * l(t).
struct ProductKL {
  PowerK k;
  DecayL l;

  double operator()(double s, double t) const { return k(s) * l(t); }
};

// Loosens an exponential K*L bound c1 * s^a1 * b1^t into a rational one with
// prescribed decay exponent b1' > 0:
//   c1' = max_{t in Z>=0} c1 * b1^t * (t+1)^{b1'},
// scanned past the analytic stationary point so the returned coefficient is
// minimal. With b1' = -ln(b1) the maximum sits at t = 0 and c1' = c1.
ProductKL exp_to_rational(const ProductKL& beta, double b1_prime);

}  // namespace mhekit
