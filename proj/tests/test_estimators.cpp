#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mhekit/errors.hpp"
#include "mhekit/estimators.hpp"

using namespace mhekit;

namespace {

SystemModel scalar_model() {
  Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  return make_affine_model("scalar", one, one, one);
}

// Noise-free instance: x0 = x0bar, w = 0, v = 0.
TrajectoryInstance noiseless_instance(const SystemModel& model, const Eigen::VectorXd& x0,
                                      int t_f) {
  TrajectoryInstance inst;
  inst.x.resize(t_f + 1, model.n);
  inst.y.resize(t_f + 1, model.p);
  inst.w = Eigen::MatrixXd::Zero(t_f, model.g);
  inst.v = Eigen::MatrixXd::Zero(t_f + 1, model.p);
  Eigen::VectorXd x = x0;
  for (int t = 0; t <= t_f; ++t) {
    inst.x.row(t) = x.transpose();
    inst.y.row(t) = model.h(x).transpose();
    if (t < t_f) x = model.f(x, Eigen::VectorXd::Zero(model.g));
  }
  return inst;
}

EstimatorConfig classic_config(EstimatorKind kind, const SystemModel& model,
                               const Eigen::VectorXd& x0bar, double sigma0, double sigma_w,
                               double sigma_v) {
  EstimatorConfig cfg;
  cfg.kind = kind;
  cfg.x0bar = x0bar;
  cfg.cost = make_classic_cost(sigma0, sigma_w, sigma_v);
  set_gaussian_covariances(cfg, model, sigma0, sigma_w, sigma_v);
  return cfg;
}

}  // namespace

TEST_CASE("single measurement update: hand value 0.5 for KF and FIE") {
  SystemModel model = scalar_model();
  Eigen::VectorXd x0bar = Eigen::VectorXd::Zero(1);

  TrajectoryInstance inst;
  inst.x = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.y = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.w = Eigen::MatrixXd::Zero(0, 1);
  inst.v = Eigen::MatrixXd::Zero(1, 1);

  EstimatorConfig cfg = classic_config(EstimatorKind::Kf, model, x0bar, 1.0, 1.0, 1.0);
  EstimateTrace kf = run_kf(model, cfg, inst);
  CHECK(kf.xhat(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kf.error(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  cfg.kind = EstimatorKind::Fie;
  EstimateTrace fie = run_fie(model, cfg, inst);
  CHECK(fie.xhat(0, 0) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(fie.unconverged_steps() == 0);
}

TEST_CASE("FIE with the classic cost reproduces the Kalman filter") {
  SystemModel model = make_linear_example();
  Eigen::VectorXd x0bar = Eigen::VectorXd::Zero(3);

  InstanceSet set;
  set.N = 1;
  set.t_f = 12;
  set.master_seed = 5;
  auto instances = generate_instances(model, NoiseSpec::trunc_gauss(0.2),
                                      NoiseSpec::trunc_gauss(0.1), x0bar, 1.0, set);

  EstimatorConfig cfg = classic_config(EstimatorKind::Fie, model, x0bar, 1.0, 0.2, 0.1);
  EstimateTrace fie = run_fie(model, cfg, instances[0]);
  EstimateTrace kf = run_kf(model, cfg, instances[0]);

  REQUIRE(fie.unconverged_steps() == 0);
  CHECK((fie.xhat - kf.xhat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("MHE equals FIE while the window is still growing") {
  SystemModel model = make_linear_example();
  Eigen::VectorXd x0bar = Eigen::VectorXd::Zero(3);

  InstanceSet set;
  set.N = 1;
  set.t_f = 9;
  set.master_seed = 3;
  auto instances = generate_instances(model, NoiseSpec::trunc_gauss(0.2),
                                      NoiseSpec::trunc_gauss(0.1), x0bar, 1.0, set);

  EstimatorConfig cfg;
  cfg.x0bar = x0bar;
  cfg.T = 15;  // longer than the trajectory: every window grows
  cfg.cost = make_paper_cost(1.0, 0.2, 0.1, 0.99, 0.99, ArrivalDecay::exponential(0.81));

  cfg.kind = EstimatorKind::Mhe;
  EstimateTrace mhe = run_mhe(model, cfg, instances[0]);
  cfg.kind = EstimatorKind::Fie;
  EstimateTrace fie = run_fie(model, cfg, instances[0]);

  REQUIRE(mhe.unconverged_steps() == 0);
  REQUIRE(fie.unconverged_steps() == 0);
  CHECK((mhe.xhat - fie.xhat).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((mhe.objective - fie.objective).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sliding windows chain the prior to the estimate at t - T") {
  SystemModel model = make_linear_example();
  Eigen::VectorXd x0bar = Eigen::VectorXd::Zero(3);

  InstanceSet set;
  set.N = 1;
  set.t_f = 14;
  set.master_seed = 8;
  auto instances = generate_instances(model, NoiseSpec::trunc_gauss(0.2),
                                      NoiseSpec::trunc_gauss(0.1), x0bar, 1.0, set);

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::Mhe;
  cfg.x0bar = x0bar;
  cfg.T = 4;
  cfg.cost = make_paper_cost(1.0, 0.2, 0.1, 0.99, 0.99, ArrivalDecay::exponential(0.81));

  EstimateTrace tr = run_mhe(model, cfg, instances[0]);
  REQUIRE(tr.unconverged_steps() == 0);
  for (int t = 0; t <= 14; ++t) {
    if (t <= cfg.T) {
      CHECK((tr.prior.row(t) - x0bar.transpose()).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK((tr.prior.row(t) - tr.xhat.row(t - cfg.T)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("noise-free reactor data is recovered exactly") {
  SystemModel model = make_reactor_example();
  Eigen::VectorXd x0 = (Eigen::VectorXd(2) << 3.0, 1.0).finished();
  TrajectoryInstance inst = noiseless_instance(model, x0, 20);

  EstimatorConfig cfg;
  cfg.x0bar = x0;
  cfg.T = 5;
  cfg.cost = make_paper_cost(0.5, 0.05, 0.05, 0.99, 0.99,
                             ArrivalDecay::exponential(std::exp(-4.0 * 0.16 * 0.1 * 0.1)));

  cfg.kind = EstimatorKind::Mhe;
  EstimateTrace mhe = run_mhe(model, cfg, inst);
  REQUIRE(mhe.unconverged_steps() == 0);
  CHECK(mhe.error.cwiseAbs().maxCoeff() < 1e-6);

  cfg.kind = EstimatorKind::Ekf;
  set_gaussian_covariances(cfg, model, 0.5, 0.05, 0.05);
  EstimateTrace ekf = run_ekf(model, cfg, inst);
  CHECK(ekf.error.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("error rows are truth minus estimate") {
  SystemModel model = scalar_model();
  TrajectoryInstance inst;
  inst.x = Eigen::MatrixXd::Constant(1, 1, 2.0);
  inst.y = Eigen::MatrixXd::Constant(1, 1, 2.0);
  inst.w = Eigen::MatrixXd::Zero(0, 1);
  inst.v = Eigen::MatrixXd::Zero(1, 1);

  EstimatorConfig cfg =
      classic_config(EstimatorKind::Kf, model, Eigen::VectorXd::Zero(1), 1.0, 1.0, 1.0);
  EstimateTrace kf = run_kf(model, cfg, inst);
  CHECK(kf.error(0, 0) == doctest::Approx(2.0 - kf.xhat(0, 0)).epsilon(1e-14));
}

TEST_CASE("labels default from the kind and respect explicit names") {
  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::Mhe;
  CHECK(cfg.label() == "mhe");
  cfg.kind = EstimatorKind::Ekf;
  CHECK(cfg.label() == "ekf");
  cfg.name = "mhe-99";
  CHECK(cfg.label() == "mhe-99");
}

TEST_CASE("gaussian covariances match the model dimensions") {
  SystemModel model = make_reactor_example();
  EstimatorConfig cfg;
  set_gaussian_covariances(cfg, model, 0.5, 0.02, 0.1);
  CHECK(cfg.P0.rows() == 2);
  CHECK(cfg.Q.rows() == 1);
  CHECK(cfg.R.rows() == 1);
  CHECK(cfg.P0(0, 0) == doctest::Approx(0.25));
  CHECK(cfg.Q(0, 0) == doctest::Approx(0.0004));
  CHECK(cfg.R(0, 0) == doctest::Approx(0.01));
}

TEST_CASE("dispatch and validation") {
  SystemModel reactor = make_reactor_example();
  TrajectoryInstance inst = noiseless_instance(reactor, (Eigen::VectorXd(2) << 3.0, 1.0).finished(), 3);

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::Kf;
  cfg.x0bar = (Eigen::VectorXd(2) << 3.0, 1.0).finished();
  set_gaussian_covariances(cfg, reactor, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS((void)run_estimator(reactor, cfg, inst), ConfigError);  // KF needs affine

  cfg.kind = EstimatorKind::Mhe;
  cfg.T = 0;
  cfg.cost = make_paper_cost(0.5, 0.05, 0.05, 0.99, 0.99, ArrivalDecay::exponential(0.9));
  CHECK_THROWS_AS((void)run_estimator(reactor, cfg, inst), ConfigError);  // horizon >= 1

  cfg.T = 3;
  cfg.x0bar = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS((void)run_estimator(reactor, cfg, inst), ConfigError);  // prior dimension
}
