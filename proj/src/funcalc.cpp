#include "mhekit/funcalc.hpp"

#include <algorithm>
#include <cmath>

namespace mhekit {

PowerK::PowerK(double c_, double a_) : c(c_), a(a_) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("PowerK: c must be positive");
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("PowerK: a must be positive");
}

double PowerK::operator()(double s) const {
  if (s < 0.0) throw std::invalid_argument("PowerK: negative argument");
  return c * std::pow(s, a);
}

double PowerK::inverse(double r) const {
  if (r < 0.0) throw std::invalid_argument("PowerK: negative argument");
  return std::pow(r / c, 1.0 / a);
}

PowerK PowerK::inverse_fn() const { return PowerK(std::pow(1.0 / c, 1.0 / a), 1.0 / a); }

PowerK PowerK::compose(const PowerK& inner) const {
  // c * (ci * s^ai)^a = c * ci^a * s^(a*ai)
  return PowerK(c * std::pow(inner.c, a), a * inner.a);
}

PowerK PowerK::scale_arg(double m) const {
  if (!(m > 0.0)) throw std::invalid_argument("PowerK: scale must be positive");
  return PowerK(c * std::pow(m, a), a);
}

PowerK PowerK::scale_val(double m) const {
  if (!(m > 0.0)) throw std::invalid_argument("PowerK: scale must be positive");
  return PowerK(c * m, a);
}

DecayL DecayL::exponential(double b) {
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("DecayL: exponential base must be in (0,1)");
  DecayL l;
  l.family = DecayFamily::Exponential;
  l.b = b;
  return l;
}

DecayL DecayL::rational(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("DecayL: rational exponent must be positive");
  DecayL l;
  l.family = DecayFamily::Rational;
  l.b = b;
  return l;
}

double DecayL::operator()(double t) const {
  if (t < 0.0) throw std::invalid_argument("DecayL: negative time");
  return family == DecayFamily::Exponential ? std::pow(b, t) : std::pow(t + 1.0, -b);
}

DecayL DecayL::pow(double e) const {
  if (!(e > 0.0)) throw std::invalid_argument("DecayL: exponent must be positive");
  return family == DecayFamily::Exponential ? exponential(std::pow(b, e)) : rational(b * e);
}

ProductKL exp_to_rational(const ProductKL& beta, double b1_prime) {
  if (beta.l.family != DecayFamily::Exponential)
    throw MixedFamilies("exp_to_rational: input bound must have exponential decay");
  if (!(b1_prime > 0.0)) throw std::invalid_argument("exp_to_rational: b1' must be positive");

  const double b1 = beta.l.b;
  // f(t) = b1^t (t+1)^{b1'} peaks at t* = b1'/(-ln b1) - 1; integers near and
  // past it cover the maximum. The +100 guard also covers t* < 0.
  const double t_star = b1_prime / (-std::log(b1)) - 1.0;
  const long t_max = static_cast<long>(10.0 * std::max(0.0, t_star)) + 100;

  double best = 0.0;
  for (long t = 0; t <= t_max; ++t) {
    const double f = std::pow(b1, static_cast<double>(t)) * std::pow(t + 1.0, b1_prime);
    best = std::max(best, f);
  }

  ProductKL out;
  out.k = PowerK(beta.k.c * best, beta.k.a);
  out.l = DecayL::rational(b1_prime);
  return out;
}

}  // namespace mhekit
