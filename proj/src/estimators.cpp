#include "mhekit/estimators.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mhekit/errors.hpp"

namespace mhekit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

EstimateTrace make_trace(const std::string& label, const TrajectoryInstance& instance, int n) {
  EstimateTrace tr;
  const int rows = static_cast<int>(instance.y.rows());
  tr.estimator = label;
  tr.xhat = Eigen::MatrixXd::Zero(rows, n);
  tr.error = Eigen::MatrixXd::Zero(rows, n);
  tr.prior = Eigen::MatrixXd::Zero(rows, n);
  tr.objective = Eigen::VectorXd::Zero(rows);
  tr.converged.assign(rows, 1);
  tr.solve_ms = Eigen::VectorXd::Zero(rows);
  return tr;
}

void finish_errors(EstimateTrace& tr, const TrajectoryInstance& instance) {
  if (instance.x.rows() == tr.xhat.rows() && instance.x.cols() == tr.xhat.cols())
    tr.error = instance.x - tr.xhat;
}

void check_spd(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() != M.cols() || !M.isApprox(M.transpose(), 1e-10))
    throw ConfigError(std::string(what) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConfigError(std::string(what) + " must be positive definite");
}

void check_psd(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() != M.cols() || !M.isApprox(M.transpose(), 1e-10))
    throw ConfigError(std::string(what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw ConfigError(std::string(what) + " must be positive semidefinite");
}

void validate_filter_config(const SystemModel& model, const EstimatorConfig& cfg) {
  if (cfg.x0bar.size() != model.n) throw ConfigError("prior mean dimension mismatch");
  if (cfg.P0.rows() != model.n || cfg.Q.rows() != model.g || cfg.R.rows() != model.p)
    throw ConfigError("filter covariance dimension mismatch");
  check_spd(cfg.P0, "P0");
  check_spd(cfg.R, "R");
  check_psd(cfg.Q, "Q");
}

// Measurement update then prediction, shared by KF and EKF through the
// per-step linearization callback.
template <typename Relinearize>
EstimateTrace run_filter(const SystemModel& model, const EstimatorConfig& cfg,
                         const TrajectoryInstance& instance, Relinearize relin) {
  validate_filter_config(model, cfg);
  EstimateTrace tr = make_trace(cfg.label(), instance, model.n);
  const int t_f = static_cast<int>(instance.y.rows()) - 1;

  Eigen::VectorXd x = cfg.x0bar;           // prediction x_{t|t-1}
  Eigen::MatrixXd P = cfg.P0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(model.n, model.n);

  for (int t = 0; t <= t_f; ++t) {
    const auto t0 = Clock::now();
    const Eigen::MatrixXd H = model.hx(x);
    const Eigen::VectorXd innovation = instance.y.row(t).transpose() - model.h(x);
    const Eigen::MatrixXd S = H * P * H.transpose() + cfg.R;
    const Eigen::MatrixXd K = S.ldlt().solve(H * P).transpose();
    x += K * innovation;
    const Eigen::MatrixXd J = I - K * H;
    P = J * P * J.transpose() + K * cfg.R * K.transpose();

    tr.xhat.row(t) = x.transpose();
    tr.prior.row(t) = cfg.x0bar.transpose();

    if (t < t_f) {
      const auto [A, G] = relin(x);
      x = model.f(x, Eigen::VectorXd::Zero(model.g));
      P = A * P * A.transpose() + G * cfg.Q * G.transpose();
    }
    tr.solve_ms(t) = ms_since(t0);
  }
  finish_errors(tr, instance);
  return tr;
}

// One optimization window; updates the trace row at time t.
void solve_into(EstimateTrace& tr, const SystemModel& model, const EstimatorConfig& cfg,
                const TrajectoryInstance& instance, int t, int T, const Eigen::VectorXd& prior,
                WindowSolution& last, bool warm) {
  WindowProblem p;
  p.model = model;
  p.cost = cfg.cost;
  p.prior = prior;
  p.T = T;
  p.decay_time = T;
  p.y = instance.y.middleRows(t - T, T + 1);

  const auto t0 = Clock::now();
  WindowSolution sol;
  if (warm && last.omega.rows() >= 0 && last.chi0.size() == model.n) {
    sol = solve_window(p, cfg.solver, &last.chi0, &last.omega);
  } else {
    sol = solve_window(p, cfg.solver);
  }
  tr.solve_ms(t) = ms_since(t0);
  tr.xhat.row(t) = sol.x.row(T);
  tr.prior.row(t) = prior.transpose();
  tr.objective(t) = sol.objective;
  tr.converged[t] = sol.status == SolveStatus::Converged ? 1 : 0;
  last = std::move(sol);
}

// Warm start for the next window: drop the first step of the previous
// solution and append a zero disturbance row (growing windows keep all rows).
void shift_warm(WindowSolution& sol, const SystemModel& model, bool sliding) {
  if (sol.chi0.size() != model.n) return;
  const int T = static_cast<int>(sol.omega.rows());
  Eigen::MatrixXd omega(T + (sliding ? 0 : 1), model.g);
  if (sliding) {
    sol.chi0 = sol.x.row(1).transpose();
    if (T >= 1) {
      omega.topRows(T - 1) = sol.omega.bottomRows(T - 1);
      omega.row(T - 1).setZero();
    }
  } else {
    omega.topRows(T) = sol.omega;
    omega.row(T).setZero();
  }
  sol.omega = std::move(omega);
}

}  // namespace

std::string EstimatorConfig::label() const {
  if (!name.empty()) return name;
  switch (kind) {
    case EstimatorKind::Fie: return "fie";
    case EstimatorKind::Mhe: return "mhe";
    case EstimatorKind::Kf: return "kf";
    case EstimatorKind::Ekf: return "ekf";
  }
  return "estimator";
}

void set_gaussian_covariances(EstimatorConfig& cfg, const SystemModel& model, double sigma0,
                              double sigma_w, double sigma_v) {
  cfg.P0 = sigma0 * sigma0 * Eigen::MatrixXd::Identity(model.n, model.n);
  cfg.Q = sigma_w * sigma_w * Eigen::MatrixXd::Identity(model.g, model.g);
  cfg.R = sigma_v * sigma_v * Eigen::MatrixXd::Identity(model.p, model.p);
}

int EstimateTrace::unconverged_steps() const {
  int count = 0;
  for (std::uint8_t flag : converged) count += flag ? 0 : 1;
  return count;
}

EstimateTrace run_fie(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance) {
  if (cfg.x0bar.size() != model.n) throw ConfigError("prior mean dimension mismatch");
  EstimateTrace tr = make_trace(cfg.label(), instance, model.n);
  const int t_f = static_cast<int>(instance.y.rows()) - 1;

  WindowSolution last;
  for (int t = 0; t <= t_f; ++t) {
    solve_into(tr, model, cfg, instance, t, t, cfg.x0bar, last, t > 0);
    shift_warm(last, model, false);
  }
  finish_errors(tr, instance);
  return tr;
}

EstimateTrace run_mhe(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance) {
  if (cfg.x0bar.size() != model.n) throw ConfigError("prior mean dimension mismatch");
  if (cfg.T < 1) throw ConfigError("MHE horizon must be >= 1");
  EstimateTrace tr = make_trace(cfg.label(), instance, model.n);
  const int t_f = static_cast<int>(instance.y.rows()) - 1;

  WindowSolution last;
  for (int t = 0; t <= t_f; ++t) {
    const bool sliding = t > cfg.T;
    const int T = sliding ? cfg.T : t;
    const Eigen::VectorXd prior =
        sliding ? Eigen::VectorXd(tr.xhat.row(t - cfg.T).transpose()) : cfg.x0bar;
    solve_into(tr, model, cfg, instance, t, T, prior, last, t > 0);
    shift_warm(last, model, t + 1 > cfg.T);
  }
  finish_errors(tr, instance);
  return tr;
}

EstimateTrace run_kf(const SystemModel& model, const EstimatorConfig& cfg,
                     const TrajectoryInstance& instance) {
  if (!model.affine) throw ConfigError("run_kf requires an affine model");
  return run_filter(model, cfg, instance, [&](const Eigen::VectorXd&) {
    return std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(model.A, model.G);
  });
}

EstimateTrace run_ekf(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance) {
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(model.g);
  return run_filter(model, cfg, instance, [&](const Eigen::VectorXd& x) {
    return std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(model.fx(x, w0), model.fw(x, w0));
  });
}

EstimateTrace run_estimator(const SystemModel& model, const EstimatorConfig& cfg,
                            const TrajectoryInstance& instance) {
  switch (cfg.kind) {
    case EstimatorKind::Fie: return run_fie(model, cfg, instance);
    case EstimatorKind::Mhe: return run_mhe(model, cfg, instance);
    case EstimatorKind::Kf: return run_kf(model, cfg, instance);
    case EstimatorKind::Ekf: return run_ekf(model, cfg, instance);
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace mhekit
