#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhekit/cost.hpp"
#include "mhekit/funcalc.hpp"
#include "mhekit/systems.hpp"

namespace mhekit {

// One summand of a composed RGAS bound: k(s) * l(t), or just k(s) for the
// time-free disturbance gains.
struct RgasTerm {
  PowerK k;
  std::optional<DecayL> l;

  double operator()(double s, double t) const { return k(s) * (l ? (*l)(t) : 1.0); }
};

// Explicit RGAS property of the estimator,
//   |x_t - xhat_t| <= beta_x(|x0 - x0bar|, t) + alpha_w(||w||) + alpha_v(||v||),
// stored term by term. Every beta_x summand carries a decay; the alpha
// summands are plain K functions.
struct RgasBounds {
  std::vector<RgasTerm> beta_x;
  std::vector<RgasTerm> alpha_w;
  std::vector<RgasTerm> alpha_v;

  double beta(double s, double t) const;
  double alpha_w_at(double s) const;
  double alpha_v_at(double s) const;
};

// Arrival-cost admissibility range for the decay parameter b2, given the
// certificate decay family: exponential requires b1^{a2/a1} <= b2 < 1,
// rational requires 0 < b2 <= b1 a2/a1. `margin` is the slack of the tested
// arrival inside the range (negative = inadmissible).
struct AdmissibleRange {
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
  double margin = 0.0;
};

// Throws MixedFamilies when the certificate and arrival decays belong to
// different families; loosen the certificate with exp_to_rational first.
AdmissibleRange check_arrival_admissible(const IossCertificate& cert,
                                         const ArrivalCostSpec& arrival);

// Composes the estimator RGAS bounds from the system certificate, the arrival
// cost and the stage-cost envelopes. Requires an admissible arrival decay and
// a certificate exponent a1 >= 1.
RgasBounds compose_rgas_bounds(const IossCertificate& cert, const ArrivalCostSpec& arrival,
                               const Sandwich& envelopes);

// Worst-case window-initial error seen by any MHE instance,
//   s_bar = beta_x(M0, 0) + (alpha_w(Mw) + alpha_v(Mv)) / (1 - eta).
double compute_s_bar(const RgasBounds& bounds, double M0, double Mw, double Mv, double eta);

struct HorizonAssumptions {
  double M0 = 0.0, Mw = 0.0, Mv = 0.0;
  std::string certificate_id;
  std::string cost_id;
};

// Result of the minimal-horizon search: the smallest T with
// beta_x(s, T) <= eta s over s in [0, s_bar], or no such T (finite = false)
// when some beta_x exponent is below one.
struct HorizonCertificate {
  double eta = 0.5;
  double s_bar = 0.0;
  bool finite = false;
  int T_min = 0;
  // Per-term values of k(s_bar) l(T_min) / s_bar; eta minus their sum is the
  // overall slack.
  std::vector<double> term_contributions;
  double margin = 0.0;
  HorizonAssumptions assumptions;
};

// The contraction condition is checked at the analytic worst case s = s_bar
// (valid because every shipped exponent is >= 1) and on a geometric grid of
// 200 points in (0, s_bar] to guard mixed-exponent sums.
HorizonCertificate min_horizon(const RgasBounds& bounds, double s_bar, double eta);

// End-to-end convenience: uncertainty magnitudes from the truncation boxes
// (M0 = 3 sigma0 sqrt(n), Mw = 3 sigma_w sqrt(g), Mv = 3 sigma_v sqrt(p)),
// then compose, s_bar, and the horizon search.
HorizonCertificate horizon_for(const IossCertificate& cert, const CostSpec& cost, int n, int g,
                               int p, double sigma0, double sigma_w, double sigma_v, double eta,
                               const std::string& certificate_id = {},
                               const std::string& cost_id = {});

// Suboptimality test: the suboptimal window cost stays within gamma of a
// certified lower bound on the optimum.
bool check_suboptimality(double v_sub, double v_opt, const PowerK& gamma);

}  // namespace mhekit
