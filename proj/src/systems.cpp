#include "mhekit/systems.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mhekit/stochastics.hpp"

namespace mhekit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool SystemModel::in_admissible_box(const Eigen::VectorXd& x) const {
  if (x_lo.size() == 0) return true;
  for (int j = 0; j < n; ++j)
    if (x(j) < x_lo(j) || x(j) > x_hi(j)) return false;
  return true;
}

SystemModel make_affine_model(const std::string& name, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& G, const Eigen::MatrixXd& H,
                              const Eigen::VectorXd& f0, const Eigen::VectorXd& h0) {
  SystemModel m;
  m.name = name;
  m.n = static_cast<int>(A.rows());
  m.g = static_cast<int>(G.cols());
  m.p = static_cast<int>(H.rows());
  m.affine = true;
  m.A = A;
  m.G = G;
  m.H = H;
  m.f0 = f0.size() ? f0 : Eigen::VectorXd::Zero(m.n);
  m.h0 = h0.size() ? h0 : Eigen::VectorXd::Zero(m.p);
  if (A.cols() != m.n || G.rows() != m.n || H.cols() != m.n || m.f0.size() != m.n ||
      m.h0.size() != m.p)
    throw std::invalid_argument("make_affine_model: inconsistent dimensions");
  m.x_lo = Eigen::VectorXd::Constant(m.n, -kInf);
  m.x_hi = Eigen::VectorXd::Constant(m.n, kInf);
  const Eigen::VectorXd fc = m.f0, hc = m.h0;
  m.f = [A, G, fc](const Eigen::VectorXd& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return A * x + G * w + fc;
  };
  m.h = [H, hc](const Eigen::VectorXd& x) -> Eigen::VectorXd { return H * x + hc; };
  m.fx = [A](const Eigen::VectorXd&, const Eigen::VectorXd&) { return A; };
  m.fw = [G](const Eigen::VectorXd&, const Eigen::VectorXd&) { return G; };
  m.hx = [H](const Eigen::VectorXd&) -> Eigen::MatrixXd { return H; };
  return m;
}

static SystemModel make_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G,
                               const Eigen::RowVectorXd& H, const std::string& name) {
  return make_affine_model(name, A, G, H, {}, {});
}

SystemModel make_linear_example() {
  Eigen::MatrixXd A(3, 3);
  A << 0.74, 0.21, -0.25,
       0.09, 0.86, -0.19,
      -0.09, 0.18, 0.50;
  Eigen::RowVectorXd H(3);
  H << 0.1, 2.0, 1.0;
  return make_linear(A, Eigen::MatrixXd::Identity(3, 3), H, "linear3");
}

SystemModel make_linear_example_shared() {
  Eigen::MatrixXd A(3, 3);
  A << 0.74, 0.21, -0.25,
       0.09, 0.86, -0.19,
      -0.09, 0.18, 0.50;
  Eigen::RowVectorXd H(3);
  H << 0.1, 2.0, 1.0;
  return make_linear(A, Eigen::MatrixXd::Ones(3, 1), H, "linear3_shared");
}

SystemModel make_reactor_example(double Ts, double c0) {
  if (!(Ts > 0.0)) throw std::invalid_argument("make_reactor_example: Ts must be positive");
  if (!(c0 > 0.0)) throw std::invalid_argument("make_reactor_example: c0 must be positive");
  const double k = kReactorRateConstant;

  SystemModel m;
  m.name = "reactor";
  m.n = 2;
  m.g = 1;
  m.p = 1;
  m.affine = false;
  m.x_lo = (Eigen::VectorXd(2) << 0.0, c0).finished();
  m.x_hi = Eigen::VectorXd::Constant(2, kInf);
  m.f = [Ts, k](const Eigen::VectorXd& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    // Shared reaction increment keeps x1 + 2 x2 conserved to rounding when w = 0.
    const double q = Ts * k * x(0) * x(0);
    Eigen::VectorXd xn(2);
    xn(0) = x(0) - 2.0 * q + Ts * w(0);
    xn(1) = x(1) + q;
    return xn;
  };
  m.h = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, x(0) + x(1));
  };
  m.fx = [Ts, k](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::MatrixXd J(2, 2);
    J << 1.0 - 4.0 * k * Ts * x(0), 0.0,
         2.0 * k * Ts * x(0), 1.0;
    return J;
  };
  m.fw = [Ts](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return (Eigen::MatrixXd(2, 1) << Ts, 0.0).finished();
  };
  m.hx = [](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return (Eigen::MatrixXd(1, 2) << 1.0, 1.0).finished();
  };
  return m;
}

IossCertificate linear_ioss_certificate(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw std::invalid_argument("linear_ioss_certificate: A must be square");

  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw NotDiagonalizable("linear_ioss_certificate: eigendecomposition failed");

  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0) throw Unstable("linear_ioss_certificate: spectral radius >= 1");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw NotDiagonalizable("linear_ioss_certificate: eigenvector basis condition > 1e12");
  const double kappa = smax / smin;

  IossCertificate cert;
  cert.beta = ProductKL{PowerK(kappa, 1.0), DecayL::exponential(rho)};
  cert.alpha1 = PowerK(kappa / (1.0 - rho), 1.0);
  cert.alpha2 = std::nullopt;
  return cert;
}

IossCertificate reactor_ioss_certificate(double k, double c0, double Ts) {
  if (!(k > 0.0 && c0 > 0.0 && Ts > 0.0))
    throw std::invalid_argument("reactor_ioss_certificate: k, c0, Ts must be positive");
  IossCertificate cert;
  cert.beta = ProductKL{PowerK(2.0, 1.0), DecayL::exponential(std::exp(-2.0 * k * c0 * Ts))};
  cert.alpha1 = PowerK(1.0 / (k * c0), 1.0);
  cert.alpha2 = PowerK(1.0, 1.0);
  return cert;
}

IossCertificate certificate_with_rational_decay(const IossCertificate& cert, double b1_prime) {
  IossCertificate out = cert;
  out.beta = exp_to_rational(cert.beta, b1_prime);
  return out;
}

CertCheck verify_certificate_empirically(const SystemModel& model, const IossCertificate& cert,
                                         const Eigen::VectorXd& x0_lo, const Eigen::VectorXd& x0_hi,
                                         double w_bound, int n_pairs, int horizon,
                                         std::uint64_t seed) {
  if (x0_lo.size() != model.n || x0_hi.size() != model.n)
    throw std::invalid_argument("verify_certificate_empirically: x0 bounds size");
  if (n_pairs < 1 || horizon < 0)
    throw std::invalid_argument("verify_certificate_empirically: bad sizes");

  Rng rng(seed);
  auto draw_x0 = [&]() {
    Eigen::VectorXd x(model.n);
    for (int tries = 0;; ++tries) {
      for (int j = 0; j < model.n; ++j)
        x(j) = x0_lo(j) + (x0_hi(j) - x0_lo(j)) * rng.uniform();
      if (model.in_admissible_box(x)) return x;
      if (tries > 100000)
        throw std::invalid_argument("verify_certificate_empirically: empty admissible box");
    }
  };

  CertCheck report;
  report.pairs = n_pairs;
  report.horizon = horizon;
  double max_violation = -kInf;

  for (int pair = 0; pair < n_pairs; ++pair) {
    const bool share_w = (pair % 2 == 0);

    Eigen::VectorXd xa = draw_x0();
    Eigen::VectorXd xb = draw_x0();
    Eigen::MatrixXd wa(horizon, model.g), wb(horizon, model.g);
    for (int t = 0; t < horizon; ++t)
      for (int j = 0; j < model.g; ++j) {
        wa(t, j) = w_bound * (2.0 * rng.uniform() - 1.0);
        wb(t, j) = share_w ? wa(t, j) : w_bound * (2.0 * rng.uniform() - 1.0);
      }

    const double dx0 = (xa - xb).norm();
    double sup_dw = 0.0;
    double sup_dh = (model.h(xa) - model.h(xb)).norm();

    for (int t = 0; t <= horizon; ++t) {
      const double lhs = (xa - xb).norm();
      double rhs = cert.beta(dx0, static_cast<double>(t));
      if (cert.alpha1) rhs += (*cert.alpha1)(sup_dw);
      if (cert.alpha2) rhs += (*cert.alpha2)(sup_dh);
      max_violation = std::max(max_violation, lhs - rhs);

      if (t == horizon) break;
      sup_dw = std::max(sup_dw, (wa.row(t) - wb.row(t)).norm());
      xa = model.f(xa, wa.row(t).transpose());
      xb = model.f(xb, wb.row(t).transpose());
      sup_dh = std::max(sup_dh, (model.h(xa) - model.h(xb)).norm());
    }
  }

  report.max_violation = max_violation;
  return report;
}

}  // namespace mhekit
