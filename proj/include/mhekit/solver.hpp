#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "mhekit/cost.hpp"
#include "mhekit/qp.hpp"
#include "mhekit/systems.hpp"

namespace mhekit {

// One estimation window over times [t-T, t]: y holds the T+1 measurement rows,
// prior is the belief about the window-initial state, decay_time feeds the
// arrival decay (equals T for sliding windows, the elapsed time for growing
// full-information windows). Decision variables are the window-initial state
// and the T disturbances (single shooting); residuals are eliminated.
struct WindowProblem {
  SystemModel model;
  CostSpec cost;
  Eigen::VectorXd prior;
  Eigen::MatrixXd y;  // (T+1) x p
  int T = 0;
  double decay_time = 0.0;
};

// Exact epigraph reformulation of an affine-model window: max terms become
// bound variables with quadratic rows, one-norm losses split into signed
// linear rows, boxes/balls become linear/quadratic rows. Requires an affine
// model and quadratic arrival (a2 == 2).
QcqpProblem build_epigraph_qp(const WindowProblem& p);

struct SolverOptions {
  QpOptions qp;
  int restarts = 5;          // multistart count for nonlinear models
  int max_scp_iters = 100;
  double trust_delta0 = 1.0;
  double armijo = 1e-4;
  double step_tol = 1e-9;    // accepted-step infinity norm
  double obj_tol = 1e-10;    // accepted-step objective decrease
  std::uint64_t seed = 1;    // multistart perturbations
};

struct WindowSolution {
  Eigen::VectorXd chi0;
  Eigen::MatrixXd omega;  // T x g
  Eigen::MatrixXd x;      // (T+1) x n shooting states
  Eigen::MatrixXd nu;     // (T+1) x p residuals
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;      // QP iterations (affine) or accepted SCP iterations
  int restarts_used = 0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
};

// Solves a window problem. Affine models reduce to a single interior-point
// solve; nonlinear models run trust-region sequential convexification with
// multistart, deterministic in (objective, restart index). Residual bounds
// are hard rows in the affine case and linearized-then-verified in the
// nonlinear case, with a penalty restoration pass (weight x10, up to 3 times)
// if the accepted point violates them.
WindowSolution solve_window(const WindowProblem& p, const SolverOptions& opts = {},
                            const Eigen::VectorXd* warm_chi = nullptr,
                            const Eigen::MatrixXd* warm_omega = nullptr);

}  // namespace mhekit
