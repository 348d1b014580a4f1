#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mhekit/qp.hpp"
#include "mhekit/stochastics.hpp"

using namespace mhekit;

namespace {

QcqpProblem::Row linear_row(const Eigen::VectorXd& a, double b) {
  QcqpProblem::Row row;
  row.a = a;
  row.b = b;
  return row;
}

QcqpProblem empty_problem(int dim) {
  QcqpProblem p;
  p.dim = dim;
  p.P = Eigen::MatrixXd::Zero(dim, dim);
  p.q = Eigen::VectorXd::Zero(dim);
  p.E.resize(0, dim);
  p.e.resize(0);
  return p;
}

}  // namespace

TEST_CASE("interior solution matches the unconstrained minimizer") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = 2.0 * rng.uniform() - 1.0;
    QcqpProblem p = empty_problem(n);
    p.P = M * M.transpose() + Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) p.q(i) = 2.0 * rng.uniform() - 1.0;
    // A distant box keeps every constraint inactive.
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a(i) = 1.0;
      p.rows.push_back(linear_row(a, -100.0));
      p.rows.push_back(linear_row(-a, -100.0));
    }

    QpReport rep = solve_qp(p);
    REQUIRE(rep.converged());
    Eigen::VectorXd zstar = p.P.ldlt().solve(-p.q);
    CHECK((rep.z - zstar).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(rep.duality_gap < 1e-7);
  }
}

TEST_CASE("active bound with the right multiplier") {
  // min 1/2 z^2 subject to z >= 1: optimum z = 1, lambda = 1.
  QcqpProblem p = empty_problem(1);
  p.P(0, 0) = 1.0;
  Eigen::VectorXd a(1);
  a << -1.0;
  p.rows.push_back(linear_row(a, 1.0));

  QpReport rep = solve_qp(p);
  REQUIRE(rep.converged());
  CHECK(rep.z(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(rep.lambda(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.objective == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("equality constraints") {
  // min 1/2 |z|^2 subject to sum z = 1: z = 1/n.
  const int n = 4;
  QcqpProblem p = empty_problem(n);
  p.P = Eigen::MatrixXd::Identity(n, n);
  p.E = Eigen::MatrixXd::Ones(1, n);
  p.e = Eigen::VectorXd::Ones(1);

  QpReport rep = solve_qp(p);
  REQUIRE(rep.converged());
  for (int i = 0; i < n; ++i) CHECK(rep.z(i) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(rep.stationarity < 1e-7);
}

TEST_CASE("quadratic row: linear objective over the unit ball") {
  // min c'z subject to 1/2 |z|^2 <= 1/2: optimum -c/|c|.
  QcqpProblem p = empty_problem(3);
  p.q << 1.0, -2.0, 2.0;
  QcqpProblem::Row ball;
  ball.Q = Eigen::MatrixXd::Identity(3, 3);
  ball.a = Eigen::VectorXd::Zero(3);
  ball.b = -0.5;
  p.rows.push_back(ball);

  QpReport rep = solve_qp(p);
  REQUIRE(rep.converged());
  const double cn = p.q.norm();
  CHECK((rep.z + p.q / cn).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(rep.objective == doctest::Approx(-cn).epsilon(1e-7));
}

TEST_CASE("badly scaled weights") {
  // Diagonal curvature spanning 1e-2 .. 1e6, the spread the estimation
  // subproblems produce.
  QcqpProblem p = empty_problem(3);
  p.P.diagonal() << 1e-2, 1.0, 1e6;
  p.q << 1.0, -2.0, 3e3;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a(i) = 1.0;
    p.rows.push_back(linear_row(a, -200.0));
    p.rows.push_back(linear_row(-a, -200.0));
  }
  QpReport rep = solve_qp(p);
  REQUIRE(rep.converged());
  Eigen::VectorXd zstar = (-p.q.array() / p.P.diagonal().array()).matrix();
  // z* = (-100, 2, -3e-3); the first coordinate stops at the box.
  zstar(0) = -100.0;
  CHECK(rep.z(0) == doctest::Approx(-100.0).epsilon(1e-6));
  CHECK(rep.z(1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.z(2) == doctest::Approx(-3e-3).epsilon(1e-4));
}

TEST_CASE("large linear penalty on a slack variable") {
  // Distilled from an estimation subproblem that once drove the corrector
  // unstable: a residual slack xi with a 3e6 linear cost, an epigraph bound
  // mv, and tight boxes. The optimum pins d1 = d2 = 1 and
  // xi = nu_ref - vr - 2.
  const double nu_ref = 6.5092087365, vr = 0.03, trust = 1.0, ca = 1.0 / 9.0;

  auto build = [&](double qv, double cv, double rho) {
    QcqpProblem p = empty_problem(4);
    p.P.topLeftCorner(2, 2) =
        2 * ca * Eigen::MatrixXd::Identity(2, 2) + 2 * cv * Eigen::MatrixXd::Ones(2, 2);
    p.q.head(2) = Eigen::Vector2d::Constant(-2 * cv * nu_ref);
    p.r = cv * nu_ref * nu_ref;
    p.q(2) = rho;
    p.q(3) = 0.01;

    QcqpProblem::Row epi;
    epi.Q = Eigen::MatrixXd::Zero(4, 4);
    epi.Q->topLeftCorner(2, 2) = 2 * qv * Eigen::MatrixXd::Ones(2, 2);
    epi.a = Eigen::VectorXd::Zero(4);
    epi.a.head(2) = Eigen::Vector2d::Constant(-2 * qv * nu_ref);
    epi.a(3) = -1.0;
    epi.b = qv * nu_ref * nu_ref;
    p.rows.push_back(epi);

    auto lin = [&](double a0, double a1, double a2, double b) {
      Eigen::VectorXd a(4);
      a << a0, a1, a2, 0.0;
      p.rows.push_back(linear_row(a, b));
    };
    lin(-1, -1, -1, nu_ref - vr);
    lin(1, 1, -1, -nu_ref - vr);
    lin(0, 0, -1, 0.0);
    lin(1, 0, 0, -trust);
    lin(-1, 0, 0, -trust);
    lin(0, 1, 0, -trust);
    lin(0, -1, 0, -trust);
    lin(-1, 0, 0, -0.1);
    lin(0, -1, 0, -4.4);
    lin(1, 0, 0, -9.0);
    lin(-1, 0, 0, -9.0);
    lin(0, 1, 0, -9.0);
    lin(0, -1, 0, -9.0);
    return p;
  };

  for (auto [qv, cv, rho] : {std::tuple{1.0, 0.99, 10.0}, std::tuple{1.0, 0.99, 1e6},
                             std::tuple{1e4, 0.99e4, 10.0}, std::tuple{1e4, 0.99e4, 3e6}}) {
    CAPTURE(rho);
    QcqpProblem p = build(qv, cv, rho);
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(4);
    z0(2) = nu_ref - vr + 0.01;
    z0(3) = qv * nu_ref * nu_ref + 0.1;
    QpReport rep = solve_qp(p, {}, &z0);
    REQUIRE(rep.converged());
    CHECK(rep.z(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.z(1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.z(2) == doctest::Approx(nu_ref - vr - 2.0).epsilon(1e-6));
    CHECK(rep.primal_feas < 1e-6);
  }
}

TEST_CASE("infeasible rows are reported, not returned as solutions") {
  QcqpProblem p = empty_problem(1);
  p.P(0, 0) = 1.0;
  Eigen::VectorXd a(1);
  a << 1.0;
  p.rows.push_back(linear_row(a, 0.0));    // z <= 0
  p.rows.push_back(linear_row(-a, 1.0));   // z >= 1
  QpReport rep = solve_qp(p);
  CHECK_FALSE(rep.converged());
  CHECK(rep.status == SolveStatus::Infeasible);
}

TEST_CASE("dimension validation") {
  QcqpProblem p = empty_problem(2);
  p.q.resize(3);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);

  QcqpProblem p2 = empty_problem(2);
  p2.rows.push_back(linear_row(Eigen::VectorXd::Zero(5), 0.0));
  CHECK_THROWS_AS(solve_qp(p2), std::invalid_argument);
}

TEST_CASE("warm start does not change the answer") {
  QcqpProblem p = empty_problem(2);
  p.P = Eigen::MatrixXd::Identity(2, 2);
  p.q << -1.0, -2.0;
  Eigen::VectorXd a(2);
  a << 1.0, 1.0;
  p.rows.push_back(linear_row(a, -1.0));  // z1 + z2 <= 1

  QpReport cold = solve_qp(p);
  Eigen::VectorXd z0(2);
  z0 << 5.0, -7.0;
  QpReport warm = solve_qp(p, {}, &z0);
  REQUIRE(cold.converged());
  REQUIRE(warm.converged());
  CHECK((cold.z - warm.z).cwiseAbs().maxCoeff() < 1e-7);
}
