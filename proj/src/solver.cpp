#include "mhekit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mhekit/stochastics.hpp"

namespace mhekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Layout {
  int n = 0, g = 0, p = 0, T = 0;
  bool has_aux = false;  // one-norm measurement loss splits
  bool has_xi = false;   // soft residual bounds (convexification only)
  bool has_mw = false;
  bool has_mv = false;
  int dim = 0;

  int chi() const { return 0; }
  int omega(int tau) const { return n + tau * g; }
  int aux(int tau, int j) const { return n + T * g + tau * p + j; }
  int xi(int tau) const { return n + T * g + (has_aux ? (T + 1) * p : 0) + tau; }
  int mw() const {
    return n + T * g + (has_aux ? (T + 1) * p : 0) + (has_xi ? T + 1 : 0);
  }
  int mv() const { return mw() + (has_mw ? 1 : 0); }
};

// Everything the assembler needs, expressed around a reference trajectory so
// the same code serves the affine (absolute decision, zero reference) and the
// convexified (delta decision) forms.
struct WindowLocal {
  Layout lay;
  Eigen::VectorXd chi_ref;               // reference window-initial state
  Eigen::MatrixXd omega_ref;             // T x g reference disturbances
  std::vector<Eigen::MatrixXd> R;        // nu_tau(z) = nu_ref_tau + R_tau z
  Eigen::MatrixXd nu_ref;                // (T+1) x p
  double trust = kInf;                   // infinity-norm trust region on (chi, omega)
  double rho_soft = 0.0;                 // penalty weight when has_xi
};

Layout make_layout(const WindowProblem& p, bool soft_nu) {
  Layout lay;
  lay.n = p.model.n;
  lay.g = p.model.g;
  lay.p = p.model.p;
  lay.T = p.T;
  const StageCostSpec& st = p.cost.stage;
  lay.has_aux = st.loss_v.kind == LossKind::OneNorm;
  lay.has_xi = soft_nu;
  lay.has_mw = st.averaged && st.lambda_w < 1.0 && p.T >= 1;
  lay.has_mv = st.averaged && st.lambda_v < 1.0;
  lay.dim = lay.n + lay.T * lay.g + (lay.has_aux ? (lay.T + 1) * lay.p : 0) +
            (lay.has_xi ? lay.T + 1 : 0) + (lay.has_mw ? 1 : 0) + (lay.has_mv ? 1 : 0);
  return lay;
}

// Shooting sensitivities of the reference trajectory: states[tau] and
// S[tau] with x_tau(z) ~= states[tau] + S[tau] * z over the (chi, omega)
// block. Exact for affine models.
void shoot(const SystemModel& model, const Eigen::VectorXd& chi,
           const Eigen::MatrixXd& omega, int T, int dim, std::vector<Eigen::VectorXd>& states,
           std::vector<Eigen::MatrixXd>& S) {
  const int n = model.n, g = model.g;
  states.assign(T + 1, Eigen::VectorXd());
  S.assign(T + 1, Eigen::MatrixXd::Zero(n, dim));
  states[0] = chi;
  S[0].leftCols(n).setIdentity();
  for (int tau = 0; tau < T; ++tau) {
    const Eigen::VectorXd wk = omega.row(tau).transpose();
    const Eigen::MatrixXd A = model.fx(states[tau], wk);
    const Eigen::MatrixXd G = model.fw(states[tau], wk);
    states[tau + 1] = model.f(states[tau], wk);
    S[tau + 1] = A * S[tau];
    S[tau + 1].middleCols(n + tau * g, g) += G;
  }
}

WindowLocal linearize(const WindowProblem& p, const Eigen::VectorXd& chi,
                      const Eigen::MatrixXd& omega, bool soft_nu, double trust,
                      double rho_soft) {
  WindowLocal loc;
  loc.lay = make_layout(p, soft_nu);
  loc.chi_ref = chi;
  loc.omega_ref = omega;
  loc.trust = trust;
  loc.rho_soft = rho_soft;

  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::MatrixXd> S;
  shoot(p.model, chi, omega, p.T, loc.lay.dim, states, S);

  loc.R.resize(p.T + 1);
  loc.nu_ref.resize(p.T + 1, p.model.p);
  for (int tau = 0; tau <= p.T; ++tau) {
    loc.nu_ref.row(tau) =
        (p.y.row(tau).transpose() - p.model.h(states[tau])).transpose();
    loc.R[tau] = -p.model.hx(states[tau]) * S[tau];
  }
  return loc;
}

struct BuiltQp {
  QcqpProblem qp;
  Layout lay;
  Eigen::VectorXd z0;
};

BuiltQp assemble(const WindowProblem& p, const WindowLocal& loc) {
  const Layout& lay = loc.lay;
  const StageCostSpec& st = p.cost.stage;
  const double qv = st.loss_v.weight;
  const double qw = st.loss_w.weight;
  const int T = p.T;

  if (st.loss_w.kind != LossKind::Quadratic)
    throw std::invalid_argument("window solver: disturbance loss must be quadratic");
  if (p.cost.arrival.a2 != 2.0)
    throw std::invalid_argument("window solver: arrival exponent must be 2");

  QcqpProblem qp;
  qp.dim = lay.dim;
  qp.P = Eigen::MatrixXd::Zero(lay.dim, lay.dim);
  qp.q = Eigen::VectorXd::Zero(lay.dim);
  qp.r = 0.0;
  qp.E.resize(0, lay.dim);

  // Arrival c |chi_ref + dchi - prior|^2 decay.
  const double ca = p.cost.arrival.c2 * p.cost.arrival.decay.eval(p.decay_time);
  const Eigen::VectorXd d0 = loc.chi_ref - p.prior;
  qp.P.topLeftCorner(lay.n, lay.n) += 2.0 * ca * Eigen::MatrixXd::Identity(lay.n, lay.n);
  qp.q.head(lay.n) += 2.0 * ca * d0;
  qp.r += ca * d0.squaredNorm();

  // Averaged disturbance sum.
  if (T > 0) {
    const double cw = (st.averaged ? st.lambda_w / T : 1.0) * qw;
    for (int tau = 0; tau < T; ++tau) {
      const int o = lay.omega(tau);
      const Eigen::VectorXd wr = loc.omega_ref.row(tau).transpose();
      qp.P.block(o, o, lay.g, lay.g) += 2.0 * cw * Eigen::MatrixXd::Identity(lay.g, lay.g);
      qp.q.segment(o, lay.g) += 2.0 * cw * wr;
      qp.r += cw * wr.squaredNorm();
    }
  }

  // Measurement sum.
  const double cv = (st.averaged ? st.lambda_v / (T + 1) : 1.0) * qv;
  if (st.loss_v.kind == LossKind::Quadratic) {
    for (int tau = 0; tau <= T; ++tau) {
      const Eigen::VectorXd rr = loc.nu_ref.row(tau).transpose();
      qp.P.noalias() += 2.0 * cv * loc.R[tau].transpose() * loc.R[tau];
      qp.q.noalias() += 2.0 * cv * loc.R[tau].transpose() * rr;
      qp.r += cv * rr.squaredNorm();
    }
  } else {
    for (int tau = 0; tau <= T; ++tau)
      for (int j = 0; j < lay.p; ++j) qp.q(lay.aux(tau, j)) += cv;
  }

  auto linear_row = [&](const Eigen::VectorXd& a, double b) {
    QcqpProblem::Row row;
    row.a = a;
    row.b = b;
    qp.rows.push_back(std::move(row));
  };

  // One-norm splits |nu_tau_j| <= aux_tau_j.
  if (lay.has_aux) {
    for (int tau = 0; tau <= T; ++tau)
      for (int j = 0; j < lay.p; ++j) {
        Eigen::VectorXd a = loc.R[tau].row(j).transpose();
        a(lay.aux(tau, j)) -= 1.0;
        linear_row(a, loc.nu_ref(tau, j));
        a = -loc.R[tau].row(j).transpose();
        a(lay.aux(tau, j)) -= 1.0;
        linear_row(a, -loc.nu_ref(tau, j));
      }
  }

  // Epigraph of the disturbance max.
  if (lay.has_mw) {
    qp.q(lay.mw()) += 1.0 - st.lambda_w;
    for (int tau = 0; tau < T; ++tau) {
      const int o = lay.omega(tau);
      const Eigen::VectorXd wr = loc.omega_ref.row(tau).transpose();
      QcqpProblem::Row row;
      row.Q = Eigen::MatrixXd::Zero(lay.dim, lay.dim);
      row.Q->block(o, o, lay.g, lay.g) = 2.0 * qw * Eigen::MatrixXd::Identity(lay.g, lay.g);
      row.a = Eigen::VectorXd::Zero(lay.dim);
      row.a.segment(o, lay.g) = 2.0 * qw * wr;
      row.a(lay.mw()) = -1.0;
      row.b = qw * wr.squaredNorm();
      qp.rows.push_back(std::move(row));
    }
  }

  // Epigraph of the measurement max.
  if (lay.has_mv) {
    qp.q(lay.mv()) += 1.0 - st.lambda_v;
    if (st.loss_v.kind == LossKind::Quadratic) {
      for (int tau = 0; tau <= T; ++tau) {
        const Eigen::VectorXd rr = loc.nu_ref.row(tau).transpose();
        QcqpProblem::Row row;
        row.Q = Eigen::MatrixXd(2.0 * qv * loc.R[tau].transpose() * loc.R[tau]);
        row.a = Eigen::VectorXd(2.0 * qv * loc.R[tau].transpose() * rr);
        row.a(lay.mv()) -= 1.0;
        row.b = qv * rr.squaredNorm();
        qp.rows.push_back(std::move(row));
      }
    } else {
      for (int tau = 0; tau <= T; ++tau) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
        for (int j = 0; j < lay.p; ++j) a(lay.aux(tau, j)) = qv;
        a(lay.mv()) = -1.0;
        linear_row(a, 0.0);
      }
    }
  }

  // Window-initial state bound around the prior.
  const CostBounds& bd = p.cost.bounds;
  if (bd.x_kind == StateBoundKind::Box) {
    for (int i = 0; i < lay.n; ++i) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
      a(i) = 1.0;
      linear_row(a, loc.chi_ref(i) - p.prior(i) - bd.x_radius);
      a(i) = -1.0;
      linear_row(a, -(loc.chi_ref(i) - p.prior(i)) - bd.x_radius);
    }
  } else {
    QcqpProblem::Row row;
    row.Q = Eigen::MatrixXd::Zero(lay.dim, lay.dim);
    row.Q->topLeftCorner(lay.n, lay.n) = 2.0 * Eigen::MatrixXd::Identity(lay.n, lay.n);
    row.a = Eigen::VectorXd::Zero(lay.dim);
    row.a.head(lay.n) = 2.0 * d0;
    row.b = d0.squaredNorm() - bd.x_radius * bd.x_radius;
    qp.rows.push_back(std::move(row));
  }

  // Admissible-state box on the window-initial state.
  if (p.model.x_lo.size() == lay.n) {
    for (int i = 0; i < lay.n; ++i) {
      if (std::isfinite(p.model.x_lo(i))) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
        a(i) = -1.0;
        linear_row(a, p.model.x_lo(i) - loc.chi_ref(i));
      }
      if (std::isfinite(p.model.x_hi(i))) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
        a(i) = 1.0;
        linear_row(a, loc.chi_ref(i) - p.model.x_hi(i));
      }
    }
  }

  // Disturbance boxes.
  for (int tau = 0; tau < T; ++tau)
    for (int j = 0; j < lay.g; ++j) {
      const int o = lay.omega(tau) + j;
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
      a(o) = 1.0;
      linear_row(a, loc.omega_ref(tau, j) - bd.w_radius);
      a(o) = -1.0;
      linear_row(a, -loc.omega_ref(tau, j) - bd.w_radius);
    }

  // Residual boxes, softened with slack xi in the convexified form.
  for (int tau = 0; tau <= T; ++tau)
    for (int j = 0; j < lay.p; ++j) {
      Eigen::VectorXd a = loc.R[tau].row(j).transpose();
      if (lay.has_xi) a(lay.xi(tau)) = -1.0;
      linear_row(a, loc.nu_ref(tau, j) - bd.v_radius);
      a = -loc.R[tau].row(j).transpose();
      if (lay.has_xi) a(lay.xi(tau)) = -1.0;
      linear_row(a, -loc.nu_ref(tau, j) - bd.v_radius);
    }
  if (lay.has_xi) {
    for (int tau = 0; tau <= T; ++tau) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
      a(lay.xi(tau)) = -1.0;
      linear_row(a, 0.0);
      qp.q(lay.xi(tau)) += loc.rho_soft;
    }
  }

  // Trust region on the (chi, omega) block.
  if (std::isfinite(loc.trust)) {
    for (int i = 0; i < lay.n + T * lay.g; ++i) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.dim);
      a(i) = 1.0;
      linear_row(a, -loc.trust);
      a(i) = -1.0;
      linear_row(a, -loc.trust);
    }
  }

  // Starting point: zero deviation, bound variables padded above their
  // reference losses.
  BuiltQp out;
  out.z0 = Eigen::VectorXd::Zero(lay.dim);
  if (lay.has_aux)
    for (int tau = 0; tau <= T; ++tau)
      for (int j = 0; j < lay.p; ++j)
        out.z0(lay.aux(tau, j)) = std::abs(loc.nu_ref(tau, j)) + 0.1;
  if (lay.has_xi)
    for (int tau = 0; tau <= T; ++tau) {
      double viol = 0.0;
      for (int j = 0; j < lay.p; ++j)
        viol = std::max(viol, std::abs(loc.nu_ref(tau, j)) - bd.v_radius);
      out.z0(lay.xi(tau)) = std::max(0.0, viol) + 0.01;
    }
  if (lay.has_mw) {
    double mx = 0.0;
    for (int tau = 0; tau < T; ++tau)
      mx = std::max(mx, qw * loc.omega_ref.row(tau).squaredNorm());
    out.z0(lay.mw()) = mx + 0.1;
  }
  if (lay.has_mv) {
    double mx = 0.0;
    for (int tau = 0; tau <= T; ++tau)
      mx = std::max(mx, st.loss_v(loc.nu_ref.row(tau).transpose()));
    out.z0(lay.mv()) = mx + 0.1;
  }

  out.qp = std::move(qp);
  out.lay = lay;
  return out;
}

void validate(const WindowProblem& p) {
  if (p.T < 0) throw std::invalid_argument("window solver: negative window length");
  if (p.y.rows() != p.T + 1 || p.y.cols() != p.model.p)
    throw std::invalid_argument("window solver: measurement block must be (T+1) x p");
  if (p.prior.size() != p.model.n)
    throw std::invalid_argument("window solver: prior dimension");
  if (p.decay_time < 0.0) throw std::invalid_argument("window solver: negative decay time");
}

Eigen::VectorXd clamp_chi(const WindowProblem& p, Eigen::VectorXd chi) {
  const CostBounds& bd = p.cost.bounds;
  for (int i = 0; i < p.model.n; ++i) {
    chi(i) = std::clamp(chi(i), p.prior(i) - bd.x_radius, p.prior(i) + bd.x_radius);
    if (p.model.x_lo.size() == p.model.n)
      chi(i) = std::clamp(chi(i), p.model.x_lo(i), p.model.x_hi(i));
  }
  return chi;
}

struct TrueEval {
  double objective;
  double violation;      // worst residual-bound violation
  double violation_sum;  // per-step violations summed (matches the xi penalty)
  Eigen::MatrixXd x, nu;
};

TrueEval evaluate_true(const WindowProblem& p, const Eigen::VectorXd& chi,
                       const Eigen::MatrixXd& omega) {
  TrueEval ev;
  ev.x.resize(p.T + 1, p.model.n);
  ev.nu.resize(p.T + 1, p.model.p);
  Eigen::VectorXd x = chi;
  std::vector<Eigen::VectorXd> om(p.T), nu(p.T + 1);
  for (int tau = 0; tau <= p.T; ++tau) {
    ev.x.row(tau) = x.transpose();
    nu[tau] = p.y.row(tau).transpose() - p.model.h(x);
    ev.nu.row(tau) = nu[tau].transpose();
    if (tau < p.T) {
      om[tau] = omega.row(tau).transpose();
      x = p.model.f(x, om[tau]);
    }
  }
  ev.objective = eval_cost(p.cost, p.T, chi - p.prior, om, nu, p.decay_time);
  ev.violation = 0.0;
  ev.violation_sum = 0.0;
  for (int tau = 0; tau <= p.T; ++tau) {
    const double step =
        std::max(0.0, ev.nu.row(tau).cwiseAbs().maxCoeff() - p.cost.bounds.v_radius);
    ev.violation = std::max(ev.violation, step);
    ev.violation_sum += step;
  }
  return ev;
}

WindowSolution solve_affine(const WindowProblem& p, const SolverOptions& opts) {
  WindowLocal loc = linearize(p, Eigen::VectorXd::Zero(p.model.n),
                              Eigen::MatrixXd::Zero(p.T, p.model.g), false, kInf, 0.0);
  BuiltQp built = assemble(p, loc);
  // Center the initial state guess on the (clamped) prior.
  built.z0.head(p.model.n) = clamp_chi(p, p.prior);
  QpReport rep = solve_qp(built.qp, opts.qp, &built.z0);

  WindowSolution sol;
  sol.chi0 = rep.z.head(p.model.n);
  sol.omega.resize(p.T, p.model.g);
  for (int tau = 0; tau < p.T; ++tau)
    sol.omega.row(tau) = rep.z.segment(built.lay.omega(tau), p.model.g).transpose();
  const TrueEval ev = evaluate_true(p, sol.chi0, sol.omega);
  sol.x = ev.x;
  sol.nu = ev.nu;
  sol.objective = ev.objective;
  sol.status = rep.status;
  sol.iterations = rep.iterations;
  sol.restarts_used = 1;
  sol.kkt_residual = std::max({rep.stationarity, rep.primal_feas, rep.complementarity});
  sol.duality_gap = rep.duality_gap;
  return sol;
}

struct ScpResult {
  Eigen::VectorXd chi;
  Eigen::MatrixXd omega;
  double merit = kInf;
  double objective = kInf;
  double violation = kInf;
  bool converged = false;
  int iterations = 0;
  double kkt_residual = kInf;
  double duality_gap = kInf;
};

ScpResult run_scp(const WindowProblem& p, const SolverOptions& opts, Eigen::VectorXd chi,
                  Eigen::MatrixXd omega, double rho) {
  ScpResult res;
  chi = clamp_chi(p, std::move(chi));
  for (int tau = 0; tau < p.T; ++tau)
    for (int j = 0; j < p.model.g; ++j)
      omega(tau, j) = std::clamp(omega(tau, j), -p.cost.bounds.w_radius, p.cost.bounds.w_radius);

  TrueEval ev = evaluate_true(p, chi, omega);
  double merit = ev.objective + rho * ev.violation_sum;
  double delta = opts.trust_delta0;

  for (int it = 0; it < opts.max_scp_iters; ++it) {
    WindowLocal loc = linearize(p, chi, omega, true, delta, rho);
    BuiltQp built = assemble(p, loc);
    QpReport rep = solve_qp(built.qp, opts.qp, &built.z0);
    res.kkt_residual = std::max({rep.stationarity, rep.primal_feas, rep.complementarity});
    res.duality_gap = rep.duality_gap;

    if (rep.status != SolveStatus::Converged && rep.status != SolveStatus::MaxIterations) {
      delta *= 0.5;
      if (delta < 1e-12) break;
      continue;
    }

    const double pred = rep.objective - merit;  // model decrease, <= 0 up to solver tolerance
    if (pred >= -opts.obj_tol) {
      res.converged = true;
      break;
    }

    const int nfree = p.model.n + p.T * p.model.g;
    const Eigen::VectorXd step = rep.z.head(nfree);
    bool accepted = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 26; ++bt, alpha *= 0.5) {
      Eigen::VectorXd chi_t = chi + alpha * step.head(p.model.n);
      Eigen::MatrixXd omega_t = omega;
      for (int tau = 0; tau < p.T; ++tau)
        omega_t.row(tau) +=
            alpha * step.segment(p.model.n + tau * p.model.g, p.model.g).transpose();
      const TrueEval ev_t = evaluate_true(p, chi_t, omega_t);
      const double merit_t = ev_t.objective + rho * ev_t.violation_sum;
      if (merit_t <= merit + opts.armijo * alpha * pred) {
        const double decrease = merit - merit_t;
        chi = std::move(chi_t);
        omega = std::move(omega_t);
        ev = ev_t;
        merit = merit_t;
        accepted = true;
        ++res.iterations;
        if (alpha == 1.0) delta = std::min(delta * 1.5, 1e3);
        if (alpha * step.cwiseAbs().maxCoeff() <= opts.step_tol && decrease <= opts.obj_tol)
          res.converged = true;
        break;
      }
    }
    if (!accepted) {
      delta *= 0.5;
      if (delta < 1e-12) {
        res.converged = true;  // no descent within shrinking models: stationary
        break;
      }
    } else if (res.converged) {
      break;
    }
  }

  res.chi = chi;
  res.omega = omega;
  res.objective = ev.objective;
  res.violation = ev.violation;
  res.merit = merit;
  return res;
}

WindowSolution solve_nonlinear(const WindowProblem& p, const SolverOptions& opts,
                               const Eigen::VectorXd* warm_chi,
                               const Eigen::MatrixXd* warm_omega) {
  const CostBounds& bd = p.cost.bounds;
  Rng rng(opts.seed);

  std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>> starts;
  if (warm_chi && warm_omega && warm_chi->size() == p.model.n &&
      warm_omega->rows() == p.T && warm_omega->cols() == p.model.g)
    starts.emplace_back(*warm_chi, *warm_omega);
  starts.emplace_back(p.prior, Eigen::MatrixXd::Zero(p.T, p.model.g));
  while (static_cast<int>(starts.size()) < std::max(1, opts.restarts)) {
    Eigen::VectorXd chi = p.prior;
    for (int i = 0; i < p.model.n; ++i)
      chi(i) += bd.x_radius * (2.0 * rng.uniform() - 1.0);
    Eigen::MatrixXd om(p.T, p.model.g);
    for (int tau = 0; tau < p.T; ++tau)
      for (int j = 0; j < p.model.g; ++j)
        om(tau, j) = bd.w_radius * (2.0 * rng.uniform() - 1.0);
    starts.emplace_back(std::move(chi), std::move(om));
  }

  const double rho0 = 1e4 * std::max(1.0, p.cost.stage.loss_v.weight * bd.v_radius);

  // Feasible points outrank infeasible ones regardless of objective;
  // within a class, ties go to the lower objective or the smaller violation.
  const auto better = [](const ScpResult& a, const ScpResult& b) {
    const bool fa = a.violation <= 1e-8;
    const bool fb = b.violation <= 1e-8;
    if (fa != fb) return fa;
    return fa ? a.objective < b.objective : a.violation < b.violation;
  };

  ScpResult best;
  int best_idx = -1;
  for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
    ScpResult r = run_scp(p, opts, starts[i].first, starts[i].second, rho0);
    if (best_idx < 0 || better(r, best)) {
      best = std::move(r);
      best_idx = i;
    }
  }

  // Restoration: escalate the residual-bound penalty if the winner is out
  // of bounds.
  double rho = rho0;
  for (int pass = 0; pass < 3 && best.violation > 1e-8; ++pass) {
    rho *= 10.0;
    ScpResult r = run_scp(p, opts, best.chi, best.omega, rho);
    if (r.violation < best.violation ||
        (r.violation <= 1e-8 && r.objective <= best.objective))
      best = std::move(r);
  }

  WindowSolution sol;
  sol.chi0 = best.chi;
  sol.omega = best.omega;
  const TrueEval ev = evaluate_true(p, best.chi, best.omega);
  sol.x = ev.x;
  sol.nu = ev.nu;
  sol.objective = ev.objective;
  sol.status = best.violation > 1e-8
                   ? SolveStatus::Infeasible
                   : (best.converged ? SolveStatus::Converged : SolveStatus::MaxIterations);
  sol.iterations = best.iterations;
  sol.restarts_used = static_cast<int>(starts.size());
  sol.kkt_residual = best.kkt_residual;
  sol.duality_gap = best.duality_gap;
  return sol;
}

}  // namespace

QcqpProblem build_epigraph_qp(const WindowProblem& p) {
  validate(p);
  if (!p.model.affine)
    throw std::invalid_argument("build_epigraph_qp: model must be affine");
  WindowLocal loc = linearize(p, Eigen::VectorXd::Zero(p.model.n),
                              Eigen::MatrixXd::Zero(p.T, p.model.g), false, kInf, 0.0);
  return assemble(p, loc).qp;
}

WindowSolution solve_window(const WindowProblem& p, const SolverOptions& opts,
                            const Eigen::VectorXd* warm_chi, const Eigen::MatrixXd* warm_omega) {
  validate(p);
  if (p.model.affine) return solve_affine(p, opts);
  return solve_nonlinear(p, opts, warm_chi, warm_omega);
}

}  // namespace mhekit
