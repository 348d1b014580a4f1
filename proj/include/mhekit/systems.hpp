#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mhekit/funcalc.hpp"

namespace mhekit {

// Discrete-time model x+ = f(x, w), y = h(x) + v with dimensions n/g/p.
// Affine models additionally carry f = A x + G w + f0, h = H x + h0 so the
// window solver can assemble exact QPs; nonlinear models go through the
// convexification loop using the Jacobian callbacks.
struct SystemModel {
  std::string name;
  int n = 0;  // state dimension
  int g = 0;  // process-disturbance dimension
  int p = 0;  // measurement dimension
  bool affine = false;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> h;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> fx;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> fw;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hx;

  // Valid when affine == true.
  Eigen::MatrixXd A, G, H;
  Eigen::VectorXd f0, h0;

  // Admissible-state box; +-inf entries mean unconstrained.
  Eigen::VectorXd x_lo, x_hi;

  bool in_admissible_box(const Eigen::VectorXd& x) const;
};

// General affine model x+ = A x + G w + f0, y = H x + h0 + v with an
// unbounded admissible box. Empty f0/h0 default to zero.
SystemModel make_affine_model(const std::string& name, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& G, const Eigen::MatrixXd& H,
                              const Eigen::VectorXd& f0 = Eigen::VectorXd(),
                              const Eigen::VectorXd& h0 = Eigen::VectorXd());

// The paper pair of benchmark systems.
SystemModel make_linear_example();
// Variant with one scalar disturbance entering every state channel (g = 1,
// G = ones), used when the disturbances are known to be identical.
SystemModel make_linear_example_shared();
// Rate constant of the shipped reactor model; exposed so certificates can be
// built outside the factory.
inline constexpr double kReactorRateConstant = 0.16;

// Gas-phase reactor, explicit Euler with step Ts; x2 >= c0 keeps the
// detectability certificate valid.
SystemModel make_reactor_example(double Ts = 0.1, double c0 = 0.1);

// Incremental IOSS certificate: |x1_t - x2_t| <= beta(|dx0|, t)
//   + alpha1(max_{tau<t} |dw_tau|) + alpha2(max_{tau<=t} |dh_tau|).
// Absent alphas are the zero function.
struct IossCertificate {
  ProductKL beta;
  std::optional<PowerK> alpha1;
  std::optional<PowerK> alpha2;
};

// Exponential certificate from an eigendecomposition of A: beta = kappa s rho^t,
// alpha1 = kappa/(1-rho) s, with kappa the 2-norm condition number of the
// (unit-column) eigenvector matrix. Throws Unstable when rho(A) >= 1 and
// NotDiagonalizable when kappa > 1e12.
IossCertificate linear_ioss_certificate(const Eigen::MatrixXd& A);

// Contraction certificate for the reactor: beta = 2 s e^{-2 k c0 Ts t},
// alpha1 = s/(k c0), alpha2 = s.
IossCertificate reactor_ioss_certificate(double k, double c0, double Ts);

// Returns the same certificate with the beta decay loosened to the rational
// family (alphas carry over unchanged).
IossCertificate certificate_with_rational_decay(const IossCertificate& cert, double b1_prime);

struct CertCheck {
  double max_violation = 0.0;  // max over pairs and times of lhs - rhs
  int pairs = 0;
  int horizon = 0;
};

// Samples trajectory pairs with initial states uniform in [x0_lo, x0_hi]
// (intersected with the admissible box by rejection) and disturbances uniform
// in +-w_bound per coordinate, then evaluates the certificate inequality at
// every step up to `horizon`. Alternating pairs share the disturbance
// sequence so the beta/alpha2 terms are stressed in isolation.
CertCheck verify_certificate_empirically(const SystemModel& model, const IossCertificate& cert,
                                         const Eigen::VectorXd& x0_lo,
                                         const Eigen::VectorXd& x0_hi, double w_bound,
                                         int n_pairs, int horizon, std::uint64_t seed);

}  // namespace mhekit
