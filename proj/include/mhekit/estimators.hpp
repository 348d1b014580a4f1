#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mhekit/cost.hpp"
#include "mhekit/solver.hpp"
#include "mhekit/stochastics.hpp"
#include "mhekit/systems.hpp"

namespace mhekit {

enum class EstimatorKind { Fie, Mhe, Kf, Ekf };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::Mhe;
  std::string name;          // trace/CSV label; defaults from the kind
  Eigen::VectorXd x0bar;     // prior mean for the initial state
  CostSpec cost;             // optimization estimators
  int T = 15;                // MHE horizon, >= 1
  SolverOptions solver;      // optimization estimators
  Eigen::MatrixXd P0, Q, R;  // filter covariances; P0/R SPD, Q PSD

  std::string label() const;
};

// Filter covariances from the noise magnitudes: P0 = sigma0^2 I,
// Q = sigma_w^2 I, R = sigma_v^2 I in the model's dimensions.
void set_gaussian_covariances(EstimatorConfig& cfg, const SystemModel& model, double sigma0,
                              double sigma_w, double sigma_v);

// Everything one estimator produced on one instance. Rows are time-indexed;
// estimates are filtered (x_t from the window or recursion defined at t).
struct EstimateTrace {
  std::string estimator;
  Eigen::MatrixXd xhat;       // (t_f+1) x n
  Eigen::MatrixXd error;      // truth minus estimate
  Eigen::MatrixXd prior;      // prior used by the window defined at t
  Eigen::VectorXd objective;  // window objective (zero rows for KF/EKF)
  std::vector<std::uint8_t> converged;
  Eigen::VectorXd solve_ms;   // per-step solver wall time
  int unconverged_steps() const;
};

// Full-information estimation: at each t solves the growing window [0, t]
// with prior x0bar and arrival decay evaluated at t.
EstimateTrace run_fie(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance);

// Moving-horizon estimation: growing windows while t <= T (identical to FIE),
// then sliding windows [t-T, t] whose prior chains to the estimate this trace
// produced at time t-T. Windows warm-start from the previous solution shifted
// by one step.
EstimateTrace run_mhe(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance);

// Time-varying Kalman recursion on an affine model, Joseph-form updates.
// Initialized at (x0bar, P0); Q may be rank-deficient (the correlated
// disturbance variant uses the all-ones matrix).
EstimateTrace run_kf(const SystemModel& model, const EstimatorConfig& cfg,
                     const TrajectoryInstance& instance);

// Extended Kalman filter: f linearized at the filtered estimate, h at the
// prediction.
EstimateTrace run_ekf(const SystemModel& model, const EstimatorConfig& cfg,
                      const TrajectoryInstance& instance);

// Dispatch on cfg.kind.
EstimateTrace run_estimator(const SystemModel& model, const EstimatorConfig& cfg,
                            const TrajectoryInstance& instance);

}  // namespace mhekit
