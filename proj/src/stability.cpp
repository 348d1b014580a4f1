#include "mhekit/stability.hpp"

#include <cmath>
#include <stdexcept>

namespace mhekit {

double RgasBounds::beta(double s, double t) const {
  double v = 0.0;
  for (const RgasTerm& term : beta_x) v += term(s, t);
  return v;
}

double RgasBounds::alpha_w_at(double s) const {
  double v = 0.0;
  for (const RgasTerm& term : alpha_w) v += term.k(s);
  return v;
}

double RgasBounds::alpha_v_at(double s) const {
  double v = 0.0;
  for (const RgasTerm& term : alpha_v) v += term.k(s);
  return v;
}

AdmissibleRange check_arrival_admissible(const IossCertificate& cert,
                                         const ArrivalCostSpec& arrival) {
  const DecayL l1 = cert.beta.l;
  const DecayL l2 = arrival.decay.as_decay();
  if (l1.family != l2.family)
    throw MixedFamilies(
        "certificate and arrival decay families differ; loosen the certificate with "
        "exp_to_rational first");

  const double a1 = cert.beta.k.a;
  const double a2 = arrival.a2;
  AdmissibleRange r;
  if (l1.family == DecayFamily::Exponential) {
    // b2^{1/a2} >= b1^{1/a1}, b2 < 1
    r.lo = std::pow(l1.b, a2 / a1);
    r.hi = 1.0;
    r.pass = l2.b >= r.lo && l2.b < r.hi;
    r.margin = std::pow(l2.b, 1.0 / a2) - std::pow(l1.b, 1.0 / a1);
  } else {
    // a2/b2 >= a1/b1, b2 > 0
    r.lo = 0.0;
    r.hi = l1.b * a2 / a1;
    r.pass = l2.b > r.lo && l2.b <= r.hi;
    r.margin = a2 / l2.b - a1 / l1.b;
  }
  return r;
}

RgasBounds compose_rgas_bounds(const IossCertificate& cert, const ArrivalCostSpec& arrival,
                               const Sandwich& envelopes) {
  const AdmissibleRange adm = check_arrival_admissible(cert, arrival);
  if (!adm.pass)
    throw std::invalid_argument("compose_rgas_bounds: arrival decay is not admissible");
  const double c1 = cert.beta.k.c;
  const double a1 = cert.beta.k.a;
  if (a1 < 1.0)
    throw std::invalid_argument("compose_rgas_bounds: certificate exponent a1 must be >= 1");
  const DecayL l1 = cert.beta.l;
  const double c2 = arrival.c2;
  const double a2 = arrival.a2;
  const DecayL l2 = arrival.decay.as_decay();

  RgasBounds B;

  // beta_x, first summand: beta(3(1 + 3^{1/a2}) s, t).
  const double blow = 3.0 * (1.0 + std::pow(3.0, 1.0 / a2));
  B.beta_x.push_back({cert.beta.k.scale_arg(blow), l1});

  // beta_x, alpha summands: alpha_i(3 glo^{-1}(3 c2 s^{a2} l2(t))) with glo the
  // matching stage lower envelope. Power in s and the decay power split off.
  auto beta_alpha_term = [&](const PowerK& alpha, const PowerK& glo) {
    const PowerK inner(3.0 * std::pow(3.0 * c2 / glo.c, 1.0 / glo.a), a2 / glo.a);
    return RgasTerm{alpha.compose(inner), l2.pow(alpha.a / glo.a)};
  };
  if (cert.alpha1) B.beta_x.push_back(beta_alpha_term(*cert.alpha1, envelopes.gamma_w_lo));
  if (cert.alpha2) B.beta_x.push_back(beta_alpha_term(*cert.alpha2, envelopes.gamma_v_lo));

  // alpha_w / alpha_v, first summands: c1 3^{a1} (3 ghi(s) / c2)^{a1/a2}.
  auto alpha_bar = [&](const PowerK& ghi) {
    return RgasTerm{
        PowerK(c1 * std::pow(3.0, a1) * std::pow(3.0 * ghi.c / c2, a1 / a2), ghi.a * a1 / a2),
        std::nullopt};
  };
  // Same-channel summand alpha(3s + 3 glo^{-1}(3 ghi(s))): linear argument
  // because glo and ghi share the norm power.
  auto alpha_same = [&](const PowerK& alpha, const PowerK& glo, const PowerK& ghi) {
    const double m = 3.0 + 3.0 * std::pow(3.0 * ghi.c / glo.c, 1.0 / glo.a);
    return RgasTerm{alpha.scale_arg(m), std::nullopt};
  };
  // Cross-channel summand alpha(3 glo^{-1}(3 ghi(s))).
  auto alpha_cross = [&](const PowerK& alpha, const PowerK& glo, const PowerK& ghi) {
    const PowerK inner(3.0 * std::pow(3.0 * ghi.c / glo.c, 1.0 / glo.a), ghi.a / glo.a);
    return RgasTerm{alpha.compose(inner), std::nullopt};
  };

  B.alpha_w.push_back(alpha_bar(envelopes.gamma_w_hi));
  if (cert.alpha1)
    B.alpha_w.push_back(
        alpha_same(*cert.alpha1, envelopes.gamma_w_lo, envelopes.gamma_w_hi));
  if (cert.alpha2)
    B.alpha_w.push_back(
        alpha_cross(*cert.alpha2, envelopes.gamma_v_lo, envelopes.gamma_w_hi));

  B.alpha_v.push_back(alpha_bar(envelopes.gamma_v_hi));
  if (cert.alpha1)
    B.alpha_v.push_back(
        alpha_cross(*cert.alpha1, envelopes.gamma_w_lo, envelopes.gamma_v_hi));
  if (cert.alpha2)
    B.alpha_v.push_back(
        alpha_same(*cert.alpha2, envelopes.gamma_v_lo, envelopes.gamma_v_hi));

  return B;
}

double compute_s_bar(const RgasBounds& bounds, double M0, double Mw, double Mv, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("compute_s_bar: eta must be in (0, 1)");
  if (M0 < 0.0 || Mw < 0.0 || Mv < 0.0)
    throw std::invalid_argument("compute_s_bar: magnitudes must be nonnegative");
  return bounds.beta(M0, 0.0) +
         (bounds.alpha_w_at(Mw) + bounds.alpha_v_at(Mv)) / (1.0 - eta);
}

namespace {

// Contraction test beta_x(s, T) <= eta s at the given s.
bool contractive_at(const RgasBounds& bounds, double s, double T, double eta) {
  return bounds.beta(s, T) <= eta * s;
}

std::vector<double> s_grid(double s_bar) {
  std::vector<double> grid;
  grid.reserve(201);
  const int kPoints = 200;
  for (int i = 0; i < kPoints; ++i)
    grid.push_back(s_bar * std::pow(10.0, -8.0 * (1.0 - double(i) / (kPoints - 1))));
  grid.push_back(s_bar);
  return grid;
}

}  // namespace

HorizonCertificate min_horizon(const RgasBounds& bounds, double s_bar, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("min_horizon: eta must be in (0, 1)");
  if (s_bar < 0.0) throw std::invalid_argument("min_horizon: s_bar must be nonnegative");

  HorizonCertificate cert;
  cert.eta = eta;
  cert.s_bar = s_bar;

  if (s_bar == 0.0 || bounds.beta_x.empty()) {
    cert.finite = true;
    cert.T_min = 0;
    cert.margin = eta;
    return cert;
  }

  // Exponents below one blow up the per-unit bound as s -> 0: no finite T.
  for (const RgasTerm& term : bounds.beta_x)
    if (term.k.a < 1.0) return cert;

  const std::vector<double> grid = s_grid(s_bar);
  auto holds = [&](int T) {
    if (!contractive_at(bounds, s_bar, T, eta)) return false;
    for (double s : grid)
      if (!contractive_at(bounds, s, T, eta)) return false;
    return true;
  };

  const int kMaxT = 200000;
  for (int T = 0; T <= kMaxT; ++T) {
    if (holds(T)) {
      cert.finite = true;
      cert.T_min = T;
      double total = 0.0;
      for (const RgasTerm& term : bounds.beta_x) {
        const double contrib = term(s_bar, T) / s_bar;
        cert.term_contributions.push_back(contrib);
        total += contrib;
      }
      cert.margin = eta - total;
      return cert;
    }
  }
  return cert;
}

HorizonCertificate horizon_for(const IossCertificate& cert, const CostSpec& cost, int n, int g,
                               int p, double sigma0, double sigma_w, double sigma_v, double eta,
                               const std::string& certificate_id, const std::string& cost_id) {
  const Sandwich env = sandwich_bounds(cost);
  const RgasBounds bounds = compose_rgas_bounds(cert, cost.arrival, env);
  const double M0 = 3.0 * sigma0 * std::sqrt(double(n));
  const double Mw = 3.0 * sigma_w * std::sqrt(double(g));
  const double Mv = 3.0 * sigma_v * std::sqrt(double(p));
  const double s_bar = compute_s_bar(bounds, M0, Mw, Mv, eta);
  HorizonCertificate out = min_horizon(bounds, s_bar, eta);
  out.assumptions = {M0, Mw, Mv, certificate_id, cost_id};
  return out;
}

bool check_suboptimality(double v_sub, double v_opt, const PowerK& gamma) {
  if (v_sub < 0.0 || v_opt < 0.0)
    throw std::invalid_argument("check_suboptimality: costs must be nonnegative");
  return v_sub <= gamma(v_opt);
}

}  // namespace mhekit
