#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mhekit {

// Convex program
//   minimize    1/2 z'Pz + q'z + r
//   subject to  1/2 z'Q_i z + a_i'z + b_i <= 0   (Q_i PSD; absent => linear row)
//               E z = e
// Quadratic rows carry the epigraph reformulation of max terms and any
// Euclidean-ball bounds; everything else is linear.
struct QcqpProblem {
  int dim = 0;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double r = 0.0;

  struct Row {
    std::optional<Eigen::MatrixXd> Q;
    Eigen::VectorXd a;
    double b = 0.0;
  };
  std::vector<Row> rows;

  Eigen::MatrixXd E;  // 0 x dim when absent
  Eigen::VectorXd e;

  double objective(const Eigen::VectorXd& z) const;
  double constraint(int i, const Eigen::VectorXd& z) const;
  Eigen::VectorXd constraint_gradient(int i, const Eigen::VectorXd& z) const;
};

struct QpOptions {
  double kkt_tol = 1e-9;
  int max_iters = 100;
  double fraction_to_boundary = 0.99;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, NumericalFailure };

struct QpReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;  // inequality multipliers
  Eigen::VectorXd slack;
  Eigen::VectorXd y_eq;    // equality multipliers
  double objective = 0.0;

  // Max-norm KKT residuals at the returned point.
  double stationarity = 0.0;
  double primal_feas = 0.0;
  double dual_feas = 0.0;       // max(0, -min lambda); zero for interior iterates
  double complementarity = 0.0; // max_i lambda_i s_i
  // Complementarity-based optimality certificate:
  // s'lambda + sum_i lambda_i |g_i + s_i| + sum_j |y_j (Ez - e)_j|.
  double duality_gap = 0.0;
  int iterations = 0;

  bool converged() const { return status == SolveStatus::Converged; }
};

// Dense primal-dual interior point (slack form, Mehrotra predictor-corrector).
// Accepts any starting point; slacks absorb initial infeasibility.
QpReport solve_qp(const QcqpProblem& p, const QpOptions& opts = {},
                  const Eigen::VectorXd* z0 = nullptr);

}  // namespace mhekit
