#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mhekit/funcalc.hpp"

namespace mhekit {

enum class LossKind { Quadratic, OneNorm };

// Stage loss l(u) = weight * |u|^2 (Quadratic) or weight * ||u||_1 (OneNorm).
struct LossSpec {
  LossKind kind = LossKind::Quadratic;
  double weight = 1.0;

  double operator()(const Eigen::VectorXd& u) const;
  // Power of the Euclidean norm the loss grows with (2 or 1).
  double norm_power() const { return kind == LossKind::Quadratic ? 2.0 : 1.0; }
};

enum class ArrivalDecayKind { None, Exponential, Rational };

struct ArrivalDecay {
  ArrivalDecayKind kind = ArrivalDecayKind::None;
  double b = 1.0;

  static ArrivalDecay none();
  static ArrivalDecay exponential(double b);
  static ArrivalDecay rational(double b);

  double eval(double T) const;
  // The equivalent DecayL (errors out for None).
  DecayL as_decay() const;
};

// Arrival cost c2 * |d|^{a2} * decay(T) with d the deviation of the window's
// initial state from its prior.
struct ArrivalCostSpec {
  double c2 = 1.0;
  double a2 = 2.0;
  ArrivalDecay decay;

  double eval(const Eigen::VectorXd& d, double decay_time) const;
};

// Stage structure of the window cost. With `averaged` set (the certified
// family):
//   lambda_w/T sum l_w(w_tau) + lambda_v/(T+1) sum l_v(nu_tau)
//   + (1-lambda_w) max_tau l_w(w_tau) + (1-lambda_v) max_tau l_v(nu_tau).
// With `averaged` unset (the classic least-squares preset) the sums are
// unweighted and there are no max terms; that preset is not certifiable.
struct StageCostSpec {
  double lambda_w = 0.99;
  double lambda_v = 0.99;
  LossSpec loss_w;
  LossSpec loss_v;
  bool averaged = true;
};

enum class StateBoundKind { Box, Ball };

// Decision bounds: per-coordinate boxes of the given radii around the window
// prior (state) and zero (disturbance/residual). The state bound can instead
// be a Euclidean ball.
struct CostBounds {
  StateBoundKind x_kind = StateBoundKind::Box;
  double x_radius = 3.0;
  double w_radius = 3.0;
  double v_radius = 3.0;
};

struct CostSpec {
  ArrivalCostSpec arrival;
  StageCostSpec stage;
  CostBounds bounds;

  // True when the cost sits inside the certified family (averaged, lambdas
  // strictly below one, decaying arrival).
  bool certifiable() const;
};

// Full window cost for window length T: omega has T entries, nu has T+1.
// decay_time is T for sliding windows and the elapsed time for the growing
// full-information windows.
double eval_cost(const CostSpec& spec, int T, const Eigen::VectorXd& d0,
                 const std::vector<Eigen::VectorXd>& omega,
                 const std::vector<Eigen::VectorXd>& nu, double decay_time);

// Convenience overload with decay_time = T.
double eval_cost(const CostSpec& spec, int T, const Eigen::VectorXd& d0,
                 const std::vector<Eigen::VectorXd>& omega,
                 const std::vector<Eigen::VectorXd>& nu);

// K-function envelopes used by the stability calculus. The arrival part is an
// exact sandwich (the cost equals its own envelope); the stage parts bound the
// per-window sums from below by the surviving max terms and from above by the
// losses at the sequence sup-norm.
struct Sandwich {
  PowerK arrival;  // c2 s^{a2}; pair with the arrival decay for the KL form
  PowerK gamma_w_lo, gamma_w_hi;
  PowerK gamma_v_lo, gamma_v_hi;
};

// Throws DegenerateLowerBound when lambda_w or lambda_v equals 1 (no lower
// envelope survives) and for the unaveraged classic preset.
Sandwich sandwich_bounds(const CostSpec& spec);

// Classic least-squares preset: arrival 1/sigma0^2 |d|^2 (no decay),
// unaveraged quadratic sums 1/sigma_w^2, 1/sigma_v^2, bounds at 100 sigma so
// they stay compact but inactive. Equivalent to the Kalman filter on affine
// models; not certifiable.
CostSpec make_classic_cost(double sigma0, double sigma_w, double sigma_v);

// Certified family of the benchmark studies: arrival 1/sigma0^2 |d|^2 decay(.),
// quadratic disturbance loss 1/sigma_w^2, measurement loss 1/sigma_v^2
// (quadratic) or 1/sigma_v (one-norm), bounds at 3 sigma.
CostSpec make_paper_cost(double sigma0, double sigma_w, double sigma_v, double lambda_w,
                         double lambda_v, const ArrivalDecay& decay,
                         LossKind loss_v = LossKind::Quadratic);

}  // namespace mhekit
