#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mhekit/config.hpp"
#include "mhekit/errors.hpp"

using namespace mhekit;
using nlohmann::json;

namespace {

json minimal_linear() {
  return json::parse(R"({
    "model": {"name": "linear3"},
    "noise": {"sigma0": 1.0, "sigma_w": 0.2, "sigma_v": 0.1, "x0bar": [0, 0, 0]},
    "estimators": [{"kind": "mhe"}]
  })");
}

json minimal_reactor() {
  return json::parse(R"({
    "model": {"name": "reactor"},
    "noise": {"sigma0": 0.5, "sigma_w": 0.05, "sigma_v": 0.05, "x0bar": [3.0, 1.0]},
    "estimators": [{"kind": "mhe", "name": "mhe-99"}, {"kind": "ekf"}]
  })");
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
  AppConfig cfg = parse_config(minimal_linear());

  CHECK(cfg.model_name == "linear3");
  CHECK(cfg.experiment.set.N == 20);
  CHECK(cfg.experiment.set.t_f == 60);
  CHECK(cfg.experiment.set.master_seed == 1);
  CHECK(cfg.experiment.set.zero_noise_after == -1);

  REQUIRE(cfg.experiment.estimators.size() == 1);
  const auto& est = cfg.experiment.estimators[0].config;
  CHECK(est.kind == EstimatorKind::Mhe);
  CHECK(est.T == 15);
  CHECK(est.label() == "mhe");
  CHECK(est.cost.certifiable());
  CHECK(est.cost.arrival.decay.kind == ArrivalDecayKind::Exponential);
  CHECK(est.cost.arrival.decay.b == doctest::Approx(0.81).epsilon(1e-14));
  CHECK(est.cost.stage.loss_w.weight == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(est.cost.stage.loss_v.weight == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("reactor configs default the arrival decay to the contraction rate") {
  AppConfig cfg = parse_config(minimal_reactor());
  const auto& est = cfg.experiment.estimators[0].config;
  CHECK(est.cost.arrival.decay.b ==
        doctest::Approx(std::exp(-4.0 * 0.16 * 0.1 * 0.1)).epsilon(1e-14));
  CHECK(cfg.experiment.estimators[0].model.name == "reactor");
  CHECK(cfg.experiment.estimators[1].config.kind == EstimatorKind::Ekf);
}

TEST_CASE("experiment and solver sections are honored") {
  json j = minimal_linear();
  j["experiment"] = {{"N", 4},         {"t_f", 30},
                     {"seed", 99},     {"out", "results"},
                     {"sweep", {{"axis", "T"}, {"values", {5, 10, 15}}}}};
  j["solver"] = {{"kkt_tol", 1e-8}, {"restarts", 2}, {"seed", 3}};
  j["noise"]["zero_noise_after"] = 12;

  AppConfig cfg = parse_config(j);
  CHECK(cfg.experiment.set.N == 4);
  CHECK(cfg.experiment.set.t_f == 30);
  CHECK(cfg.experiment.set.master_seed == 99);
  CHECK(cfg.out_dir == "results");
  CHECK(cfg.experiment.sweep.axis == "T");
  CHECK(cfg.experiment.sweep.values == std::vector<double>{5.0, 10.0, 15.0});
  CHECK(cfg.experiment.set.zero_noise_after == 12);
  CHECK(cfg.experiment.estimators[0].config.solver.qp.kkt_tol == 1e-8);
  CHECK(cfg.experiment.estimators[0].config.solver.restarts == 2);
  CHECK(cfg.experiment.estimators[0].config.solver.seed == 3);
}

TEST_CASE("sde scaling multiplies the disturbance level by sqrt(Ts)") {
  json j = minimal_reactor();
  j["noise"]["sde_scaling"] = true;
  j["model"]["Ts"] = 0.04;

  AppConfig cfg = parse_config(j);
  CHECK(cfg.sigma_w == doctest::Approx(0.05 * 0.2).epsilon(1e-14));
  CHECK(cfg.experiment.process.sigma == doctest::Approx(0.01).epsilon(1e-14));
  // The MHE stage weight and the EKF covariance both see the scaled level.
  CHECK(cfg.experiment.estimators[0].config.cost.stage.loss_w.weight ==
        doctest::Approx(1.0 / (0.01 * 0.01)).epsilon(1e-10));
  CHECK(cfg.experiment.estimators[1].config.Q(0, 0) == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("identical disturbances split the models between estimators") {
  json j = json::parse(R"({
    "model": {"name": "linear3"},
    "noise": {"sigma0": 1.0, "sigma_w": 0.02, "sigma_v": 0.1, "x0bar": [0, 0, 0],
              "identical_disturbances": true},
    "estimators": [{"kind": "mhe", "cost": {"loss_v": "one_norm"}}, {"kind": "kf"}]
  })");

  AppConfig cfg = parse_config(j);
  CHECK(cfg.experiment.set.identical_disturbances);
  // Simulation stays on the full model.
  CHECK(cfg.experiment.model.g == 3);

  // The MHE runs the reduced single-channel model; its disturbance weight
  // carries the channel count so the window cost matches the full sum.
  const auto& mhe = cfg.experiment.estimators[0];
  CHECK(mhe.model.g == 1);
  CHECK(mhe.model.name == "linear3_shared");
  CHECK(mhe.config.cost.stage.loss_w.weight ==
        doctest::Approx(3.0 / (0.02 * 0.02)).epsilon(1e-10));
  CHECK(mhe.config.cost.stage.loss_v.kind == LossKind::OneNorm);

  // The KF keeps the full model with the rank-one covariance.
  const auto& kf = cfg.experiment.estimators[1];
  CHECK(kf.model.g == 3);
  CHECK(kf.config.Q.rows() == 3);
  CHECK(kf.config.Q(0, 1) == doctest::Approx(0.0004).epsilon(1e-14));
  CHECK(kf.config.Q(2, 2) == doctest::Approx(0.0004).epsilon(1e-14));
}

TEST_CASE("mixture noise widens the residual bounds to the channel support") {
  json j = minimal_linear();
  j["noise"]["measurement"] = {{"kind", "mixed_trunc_gauss"}, {"scale", 10.0}, {"p_nominal", 0.9}};

  AppConfig cfg = parse_config(j);
  const auto& bounds = cfg.experiment.estimators[0].config.cost.bounds;
  CHECK(bounds.v_radius == doctest::Approx(3.0).epsilon(1e-12));  // 3 * scale * sigma_v
  CHECK(bounds.w_radius == doctest::Approx(0.6).epsilon(1e-12));  // plain channel keeps 3 sigma
}

TEST_CASE("malformed configs raise ConfigError") {
  CHECK_THROWS_AS((void)parse_config(json::parse(R"({"noise": {}})")), ConfigError);

  json j = minimal_linear();
  j["noise"].erase("sigma0");
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["noise"]["sigma_w"] = 0.0;
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["noise"]["x0bar"] = {0.0, 0.0};
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["model"]["name"] = "pendulum";
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["estimators"].push_back({{"kind", "mhe"}});
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);  // duplicate label

  j = minimal_linear();
  j["estimators"][0]["kind"] = "ukf";
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["estimators"][0]["T"] = 0;
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["estimators"][0]["cost"] = {{"preset", "robust"}};
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["estimators"][0]["cost"] = {{"loss_v", "huber"}};
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);

  j = minimal_linear();
  j["experiment"] = {{"sweep", {{"axis", "T"}}}};
  CHECK_THROWS_AS((void)parse_config(j), ConfigError);
}

TEST_CASE("load_config reports file and parse problems as ConfigError") {
  CHECK_THROWS_AS((void)load_config("/nonexistent/path.json"), ConfigError);

  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "mhekit_bad_config.json";
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS((void)load_config(path.string()), ConfigError);
  fs::remove(path);
}

TEST_CASE("certified estimator selection") {
  json j = json::parse(R"({
    "model": {"name": "linear3"},
    "noise": {"sigma0": 1.0, "sigma_w": 0.2, "sigma_v": 0.1, "x0bar": [0, 0, 0]},
    "estimators": [
      {"kind": "kf"},
      {"kind": "mhe", "name": "mhe-classic", "cost": {"preset": "classic"}},
      {"kind": "mhe", "name": "mhe-99"}
    ]
  })");

  AppConfig cfg = parse_config(j);
  CertifiedSelection sel = select_certified(cfg);
  CHECK(sel.index == 2);  // first certifiable optimizer, skipping KF and classic
  CHECK_FALSE(sel.certificate.alpha2.has_value());
  CHECK(sel.certificate.beta.l.family == DecayFamily::Exponential);

  // Explicit label selection.
  cfg.stability.estimator = "mhe-99";
  CHECK(select_certified(cfg).index == 2);

  cfg.stability.estimator = "mhe-classic";
  CHECK_THROWS_AS((void)select_certified(cfg), ConfigError);

  cfg.stability.estimator = "nobody";
  CHECK_THROWS_AS((void)select_certified(cfg), ConfigError);
}

TEST_CASE("rational arrival decay loosens the certificate family") {
  json j = minimal_linear();
  j["estimators"][0]["cost"] = {{"decay", {{"family", "rational"}, {"b2", 0.05}}}};

  AppConfig cfg = parse_config(j);
  CertifiedSelection sel = select_certified(cfg);
  CHECK(sel.certificate.beta.l.family == DecayFamily::Rational);
  CHECK(sel.certificate.beta.l.b == doctest::Approx(-std::log(0.8996074190)).epsilon(1e-8));

  // The loosened decay (t+1)^{-0.106} is too slow for any horizon the search
  // covers, so the pipeline reports the condition as not satisfiable.
  HorizonCertificate hc = horizon_from_config(cfg);
  CHECK(hc.s_bar > 0.0);
  CHECK_FALSE(hc.finite);
  CHECK(hc.T_min == 0);
}

TEST_CASE("horizon pipeline agrees with the hand-assembled call") {
  AppConfig cfg = parse_config(minimal_linear());
  HorizonCertificate via_config = horizon_from_config(cfg);

  SystemModel model = make_linear_example();
  IossCertificate cert = linear_ioss_certificate(model.A);
  CostSpec cost = make_paper_cost(1.0, 0.2, 0.1, 0.99, 0.99, ArrivalDecay::exponential(0.81));
  HorizonCertificate direct =
      horizon_for(cert, cost, model.n, model.g, model.p, 1.0, 0.2, 0.1, 0.5);

  REQUIRE(via_config.finite);
  CHECK(via_config.T_min == direct.T_min);
  CHECK(via_config.s_bar == doctest::Approx(direct.s_bar).epsilon(1e-12));
  CHECK(via_config.assumptions.certificate_id == "linear3");
  CHECK(via_config.assumptions.cost_id == "mhe");
}
