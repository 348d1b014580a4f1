#include "mhekit/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mhekit {

double QcqpProblem::objective(const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(P * z) + q.dot(z) + r;
}

double QcqpProblem::constraint(int i, const Eigen::VectorXd& z) const {
  const Row& row = rows[static_cast<std::size_t>(i)];
  double g = row.a.dot(z) + row.b;
  if (row.Q) g += 0.5 * z.dot(*row.Q * z);
  return g;
}

Eigen::VectorXd QcqpProblem::constraint_gradient(int i, const Eigen::VectorXd& z) const {
  const Row& row = rows[static_cast<std::size_t>(i)];
  if (row.Q) return *row.Q * z + row.a;
  return row.a;
}

namespace {

struct Workspace {
  Eigen::VectorXd g;   // constraint values
  Eigen::MatrixXd J;   // constraint gradients (rows)
  Eigen::MatrixXd H;   // P + sum lambda_i Q_i
};

void evaluate(const QcqpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
              Workspace& ws) {
  const int m = static_cast<int>(p.rows.size());
  ws.g.resize(m);
  ws.J.resize(m, p.dim);
  ws.H = p.P;
  for (int i = 0; i < m; ++i) {
    ws.g(i) = p.constraint(i, z);
    ws.J.row(i) = p.constraint_gradient(i, z).transpose();
    if (p.rows[static_cast<std::size_t>(i)].Q)
      ws.H.noalias() += lambda(i) * (*p.rows[static_cast<std::size_t>(i)].Q);
  }
}

// Largest step in [0, 1] keeping v + alpha dv >= (1 - tau) v componentwise.
double boundary_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) alpha = std::min(alpha, -tau * v(i) / dv(i));
  return alpha;
}

// Ruiz-style equilibration. Window problems mix weights spanning many orders
// of magnitude (1/sigma^2 terms, penalty slacks), which wrecks the Newton
// system; iterating sqrt row/column scalings brings all data toward O(1).
// The scaled problem relates to the original by z = d .* z',
// g_i' = er_i g_i, (Ez)_j' = fr_j (Ez)_j, f' = f / c, so multipliers unscale
// as lambda_i = c er_i lambda_i' and y_j = c fr_j y_j'.
struct Scaling {
  Eigen::VectorXd d, er, fr;
  double c = 1.0;
};

Scaling equilibrate(QcqpProblem& p) {
  const int n = p.dim;
  const int m = static_cast<int>(p.rows.size());
  const int me = static_cast<int>(p.E.rows());
  Scaling sc;
  sc.d = Eigen::VectorXd::Ones(n);
  sc.er = Eigen::VectorXd::Ones(m);
  sc.fr = Eigen::VectorXd::Ones(me);

  Eigen::VectorXd col(n), row_i(m), row_e(me);
  for (int pass = 0; pass < 10; ++pass) {
    // Column magnitudes across all data blocks.
    for (int j = 0; j < n; ++j) col(j) = p.P.col(j).cwiseAbs().maxCoeff();
    col = col.cwiseMax(p.q.cwiseAbs());
    for (const auto& row : p.rows) {
      col = col.cwiseMax(row.a.cwiseAbs());
      if (row.Q)
        for (int j = 0; j < n; ++j) col(j) = std::max(col(j), row.Q->col(j).cwiseAbs().maxCoeff());
    }
    if (me > 0)
      for (int j = 0; j < n; ++j) col(j) = std::max(col(j), p.E.col(j).cwiseAbs().maxCoeff());

    // Row magnitudes of the constraint gradients.
    for (int i = 0; i < m; ++i) {
      const auto& row = p.rows[static_cast<std::size_t>(i)];
      row_i(i) = row.a.cwiseAbs().maxCoeff();
      if (row.Q) row_i(i) = std::max(row_i(i), row.Q->cwiseAbs().maxCoeff());
    }
    for (int j = 0; j < me; ++j) row_e(j) = p.E.row(j).cwiseAbs().maxCoeff();

    double spread = 1.0;
    auto factor = [&spread](double mag) {
      if (mag <= 0.0 || !std::isfinite(mag)) return 1.0;
      spread = std::max({spread, mag, 1.0 / mag});
      return 1.0 / std::sqrt(mag);
    };

    Eigen::VectorXd fc(n), fi(m), fe(me);
    for (int j = 0; j < n; ++j) fc(j) = factor(col(j));
    for (int i = 0; i < m; ++i) fi(i) = factor(row_i(i));
    for (int j = 0; j < me; ++j) fe(j) = factor(row_e(j));
    if (spread < 2.0) break;

    sc.d.array() *= fc.array();
    sc.er.array() *= fi.array();
    sc.fr.array() *= fe.array();

    p.P = fc.asDiagonal() * p.P * fc.asDiagonal();
    p.q.array() *= fc.array();
    for (int i = 0; i < m; ++i) {
      auto& row = p.rows[static_cast<std::size_t>(i)];
      row.a = fi(i) * fc.asDiagonal() * row.a;
      row.b *= fi(i);
      if (row.Q) *row.Q = fi(i) * (fc.asDiagonal() * (*row.Q) * fc.asDiagonal());
    }
    if (me > 0) {
      p.E = fe.asDiagonal() * p.E * fc.asDiagonal();
      p.e.array() *= fe.array();
    }
  }

  const double obj_mag = std::max(p.P.size() ? p.P.cwiseAbs().maxCoeff() : 0.0,
                                  p.q.size() ? p.q.cwiseAbs().maxCoeff() : 0.0);
  if (obj_mag > 0.0 && std::isfinite(obj_mag) && (obj_mag > 1e2 || obj_mag < 1e-2)) {
    sc.c = obj_mag;
    p.P /= sc.c;
    p.q /= sc.c;
    p.r /= sc.c;
  }
  return sc;
}

// KKT residuals and certificate of `rep` measured on `p` as given (used to
// re-express a scaled solve's report in original units).
void compute_kkt(const QcqpProblem& p, QpReport& rep) {
  const int m = static_cast<int>(p.rows.size());
  const int me = static_cast<int>(p.E.rows());
  rep.objective = p.objective(rep.z);
  Eigen::VectorXd rd = p.P * rep.z + p.q;
  double pf = 0.0, comp = 0.0, gap = 0.0;
  for (int i = 0; i < m; ++i) {
    rd.noalias() += rep.lambda(i) * p.constraint_gradient(i, rep.z);
    const double gi = p.constraint(i, rep.z);
    pf = std::max(pf, std::abs(gi + rep.slack(i)));
    comp = std::max(comp, rep.lambda(i) * rep.slack(i));
    gap += rep.lambda(i) * (rep.slack(i) + std::abs(gi + rep.slack(i)));
  }
  if (me > 0) {
    rd.noalias() += p.E.transpose() * rep.y_eq;
    const Eigen::VectorXd re = p.E * rep.z - p.e;
    pf = std::max(pf, re.cwiseAbs().maxCoeff());
    gap += (rep.y_eq.array().abs() * re.array().abs()).sum();
  }
  rep.stationarity = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
  rep.primal_feas = pf;
  rep.dual_feas = m > 0 ? std::max(0.0, -rep.lambda.minCoeff()) : 0.0;
  rep.complementarity = comp;
  rep.duality_gap = gap;
}

QpReport solve_core(const QcqpProblem& p, const QpOptions& opts, const Eigen::VectorXd* z0) {
  const int m = static_cast<int>(p.rows.size());
  const int me = static_cast<int>(p.E.rows());
  Eigen::VectorXd z = z0 ? *z0 : Eigen::VectorXd::Zero(p.dim);

  Workspace ws;
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);
  evaluate(p, z, lambda, ws);

  Eigen::VectorXd s(m);
  for (int i = 0; i < m; ++i) s(i) = std::max(0.1, -ws.g(i) + 0.1);
  for (int i = 0; i < m; ++i) lambda(i) = 0.1 / s(i);
  evaluate(p, z, lambda, ws);  // rebuild H with the actual multipliers
  Eigen::VectorXd y = Eigen::VectorXd::Zero(me);

  QpReport rep;
  rep.z = z;
  rep.lambda = lambda;
  rep.slack = s;
  rep.y_eq = y;

  auto residuals = [&](QpReport& r) {
    Eigen::VectorXd rd = p.P * z + p.q;
    if (m > 0) rd.noalias() += ws.J.transpose() * lambda;
    if (me > 0) rd.noalias() += p.E.transpose() * y;
    r.stationarity = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
    double pf = 0.0;
    for (int i = 0; i < m; ++i) pf = std::max(pf, std::abs(ws.g(i) + s(i)));
    Eigen::VectorXd re;
    if (me > 0) {
      re = p.E * z - p.e;
      pf = std::max(pf, re.cwiseAbs().maxCoeff());
    }
    r.primal_feas = pf;
    r.dual_feas = m > 0 ? std::max(0.0, -lambda.minCoeff()) : 0.0;
    r.complementarity = m > 0 ? (lambda.array() * s.array()).maxCoeff() : 0.0;
    double gap = m > 0 ? s.dot(lambda) : 0.0;
    for (int i = 0; i < m; ++i) gap += lambda(i) * std::abs(ws.g(i) + s(i));
    if (me > 0) gap += (y.array().abs() * (p.E * z - p.e).array().abs()).sum();
    r.duality_gap = gap;
  };

  const double tau = opts.fraction_to_boundary;
  double best_score = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    residuals(rep);
    rep.iterations = iter;
    rep.z = z;
    rep.lambda = lambda;
    rep.slack = s;
    rep.y_eq = y;
    rep.objective = p.objective(z);

    const double score =
        std::max({rep.stationarity, rep.primal_feas, rep.complementarity});
    if (score <= opts.kkt_tol) {
      rep.status = SolveStatus::Converged;
      return rep;
    }
    if (score < best_score * (1.0 - 1e-3)) {
      best_score = score;
      stall = 0;
    } else {
      best_score = std::min(best_score, score);
      if (++stall > 25) break;
    }
    if (iter == opts.max_iters) break;

    // Reduced Newton matrix M = H + J' diag(lambda/s) J.
    Eigen::MatrixXd M = ws.H;
    if (m > 0) {
      const Eigen::VectorXd wdiag = lambda.array() / s.array();
      M.noalias() += ws.J.transpose() * wdiag.asDiagonal() * ws.J;
    }

    Eigen::VectorXd rd = p.P * z + p.q;
    if (m > 0) rd.noalias() += ws.J.transpose() * lambda;
    if (me > 0) rd.noalias() += p.E.transpose() * y;
    Eigen::VectorXd rg(m);
    for (int i = 0; i < m; ++i) rg(i) = ws.g(i) + s(i);
    Eigen::VectorXd re = me > 0 ? Eigen::VectorXd(p.E * z - p.e) : Eigen::VectorXd();

    // One factorization serves the predictor and corrector solves; a tiny
    // escalating shift handles degenerate optimal faces.
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd kkt;
    double shift = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (me == 0) {
        ldlt.compute(shift > 0.0
                         ? Eigen::MatrixXd(M + shift * Eigen::MatrixXd::Identity(p.dim, p.dim))
                         : M);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
      } else {
        kkt.setZero(p.dim + me, p.dim + me);
        kkt.topLeftCorner(p.dim, p.dim) =
            M + shift * Eigen::MatrixXd::Identity(p.dim, p.dim);
        kkt.topRightCorner(p.dim, me) = p.E.transpose();
        kkt.bottomLeftCorner(me, p.dim) = p.E;
        lu.compute(kkt);
        if (lu.isInvertible()) break;
      }
      if (attempt >= 6) {
        rep.status = SolveStatus::NumericalFailure;
        return rep;
      }
      shift = shift == 0.0 ? 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff()) : shift * 100.0;
    }

    auto newton_solve = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                            Eigen::VectorXd& dlam, Eigen::VectorXd& dy) {
      Eigen::VectorXd rhs = -rd;
      if (m > 0)
        rhs.noalias() -= ws.J.transpose() *
                         ((lambda.array() * rg.array() - rc.array()) / s.array()).matrix();
      if (me == 0) {
        dz = ldlt.solve(rhs);
        dz += ldlt.solve(rhs - M * dz);  // one refinement pass
        dy.resize(0);
      } else {
        Eigen::VectorXd full(p.dim + me);
        full.head(p.dim) = rhs;
        full.tail(me) = -re;
        Eigen::VectorXd sol = lu.solve(full);
        sol += lu.solve(full - kkt * sol);
        dz = sol.head(p.dim);
        dy = sol.tail(me);
      }
      ds = m > 0 ? Eigen::VectorXd(-rg - ws.J * dz) : Eigen::VectorXd();
      dlam.resize(m);
      for (int i = 0; i < m; ++i) dlam(i) = (-rc(i) - lambda(i) * ds(i)) / s(i);
    };

    Eigen::VectorXd dz, ds, dlam, dy;
    double sigma_mu = 0.0;
    if (m > 0) {
      const double mu = s.dot(lambda) / m;

      // Predictor (affine scaling).
      Eigen::VectorXd rc_aff = (lambda.array() * s.array()).matrix();
      newton_solve(rc_aff, dz, ds, dlam, dy);
      const double a_aff =
          std::min(boundary_step(s, ds, 1.0), boundary_step(lambda, dlam, 1.0));
      const double mu_aff =
          (s + a_aff * ds).dot(lambda + a_aff * dlam) / m;
      double sigma = std::pow(mu_aff / mu, 3.0);
      sigma = std::clamp(sigma, 1e-6, 0.99);
      sigma_mu = sigma * mu;

      // Keep complementarity from collapsing far below the tolerance while
      // the other residuals are still open: once the slacks hit the floating
      // point floor they poison every denominator and the multipliers can no
      // longer move to close the stationarity gap.
      sigma_mu = std::max(sigma_mu, 0.01 * opts.kkt_tol);

      // Corrector with Mehrotra's second-order term, damped by the realized
      // affine step length: the products actually incurred along a step of
      // size alpha are alpha^2 ds dlam, and the undamped term can point the
      // corrector away from the central path when the predictor is blocked
      // near the boundary (a_aff << 1).
      Eigen::VectorXd rc =
          (lambda.array() * s.array() + a_aff * a_aff * dlam.array() * ds.array()).matrix();
      rc.array() -= sigma_mu;
      newton_solve(rc, dz, ds, dlam, dy);
    } else {
      Eigen::VectorXd rc0;
      newton_solve(rc0, dz, ds, dlam, dy);
    }

    double alpha = 1.0;
    if (m > 0)
      alpha = std::min(boundary_step(s, ds, tau), boundary_step(lambda, dlam, tau));

    z += alpha * dz;
    if (m > 0) {
      s += alpha * ds;
      lambda += alpha * dlam;
    }
    if (me > 0) y += alpha * dy;
    evaluate(p, z, lambda, ws);
  }

  // Ran out of iterations or stalled. Distinguish an infeasible model from
  // slow progress by the surviving primal residual.
  residuals(rep);
  rep.z = z;
  rep.lambda = lambda;
  rep.slack = s;
  rep.y_eq = y;
  rep.objective = p.objective(z);
  rep.status = rep.primal_feas > 1e-6 ? SolveStatus::Infeasible : SolveStatus::MaxIterations;
  return rep;
}

}  // namespace

QpReport solve_qp(const QcqpProblem& p, const QpOptions& opts, const Eigen::VectorXd* z0) {
  if (p.dim <= 0) throw std::invalid_argument("solve_qp: empty problem");
  if (p.P.rows() != p.dim || p.P.cols() != p.dim || p.q.size() != p.dim)
    throw std::invalid_argument("solve_qp: objective dimensions");
  for (const auto& row : p.rows)
    if (row.a.size() != p.dim || (row.Q && (row.Q->rows() != p.dim || row.Q->cols() != p.dim)))
      throw std::invalid_argument("solve_qp: constraint dimensions");
  if (p.E.rows() > 0 && (p.E.cols() != p.dim || p.e.size() != p.E.rows()))
    throw std::invalid_argument("solve_qp: equality dimensions");
  if (z0 && z0->size() != p.dim) throw std::invalid_argument("solve_qp: z0 dimension");

  QcqpProblem scaled = p;
  const Scaling sc = equilibrate(scaled);
  Eigen::VectorXd z0s;
  if (z0) z0s = z0->cwiseQuotient(sc.d);
  QpReport rep = solve_core(scaled, opts, z0 ? &z0s : nullptr);

  rep.z = sc.d.asDiagonal() * rep.z;
  rep.lambda = sc.c * sc.er.asDiagonal() * rep.lambda;
  rep.slack = rep.slack.cwiseQuotient(sc.er);
  rep.y_eq = sc.c * sc.fr.asDiagonal() * rep.y_eq;
  compute_kkt(p, rep);
  return rep;
}

}  // namespace mhekit
