#include "mhekit/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mhekit/errors.hpp"

namespace mhekit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

const json& section(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_object()) fail("missing config section '" + key + "'");
  return j.at(key);
}

double require_num(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where + "." + key + " is required");
  if (!j.at(key).is_number()) fail(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double opt_num(const json& j, const std::string& key, double fallback,
               const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::string opt_str(const json& j, const std::string& key, const std::string& fallback,
                    const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

Eigen::VectorXd require_vec(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) fail(where + "." + key + " must be an array");
  const auto& arr = j.at(key);
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(where + "." + key + " must contain only numbers");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

SystemModel model_by_name(const std::string& name, double Ts, double c0) {
  if (name == "linear3") return make_linear_example();
  if (name == "linear3_shared") return make_linear_example_shared();
  if (name == "reactor") return make_reactor_example(Ts, c0);
  fail("model.name '" + name + "' unknown (expected linear3, linear3_shared or reactor)");
}

NoiseSpec parse_channel(const json& noise, const std::string& key, double sigma) {
  NoiseSpec spec = NoiseSpec::trunc_gauss(sigma);
  if (!noise.contains(key)) return spec;
  const auto& j = noise.at(key);
  if (!j.is_object()) fail("noise." + key + " must be an object");
  const std::string where = "noise." + key;
  const std::string kind = opt_str(j, "kind", "trunc_gauss", where);
  if (kind == "trunc_gauss") return spec;
  if (kind != "mixed_trunc_gauss") fail(where + ".kind '" + kind + "' unknown");
  return NoiseSpec::mixed_trunc_gauss(sigma, opt_num(j, "scale", 10.0, where),
                                      opt_num(j, "p_nominal", 0.9, where));
}

ArrivalDecay parse_decay(const json& jc, const std::string& where, double default_b2) {
  std::string family = "exponential";
  double b2 = default_b2;
  if (jc.contains("decay")) {
    const auto& jd = jc.at("decay");
    if (!jd.is_object()) fail(where + ".decay must be an object");
    family = opt_str(jd, "family", family, where + ".decay");
    b2 = opt_num(jd, "b2", b2, where + ".decay");
  }
  if (family == "none") return ArrivalDecay::none();
  if (family == "exponential") return ArrivalDecay::exponential(b2);
  if (family == "rational") return ArrivalDecay::rational(b2);
  fail(where + ".decay.family '" + family + "' unknown");
}

SolverOptions parse_solver(const json& root) {
  SolverOptions opts;
  if (!root.contains("solver")) return opts;
  const auto& j = section(root, "solver");
  opts.qp.kkt_tol = opt_num(j, "kkt_tol", opts.qp.kkt_tol, "solver");
  opts.qp.max_iters = static_cast<int>(opt_num(j, "max_iters", opts.qp.max_iters, "solver"));
  opts.restarts = static_cast<int>(opt_num(j, "restarts", opts.restarts, "solver"));
  opts.max_scp_iters =
      static_cast<int>(opt_num(j, "scp_iters", opts.max_scp_iters, "solver"));
  opts.seed = static_cast<std::uint64_t>(opt_num(j, "seed", 1.0, "solver"));
  return opts;
}

}  // namespace

AppConfig parse_config(const nlohmann::json& root) {
  AppConfig cfg;

  const auto& jm = section(root, "model");
  cfg.model_name = opt_str(jm, "name", "", "model");
  cfg.Ts = opt_num(jm, "Ts", 0.1, "model");
  cfg.c0 = opt_num(jm, "c0", 0.1, "model");
  if (cfg.model_name.empty()) fail("model.name is required");

  const auto& jn = section(root, "noise");
  cfg.sigma0 = require_num(jn, "sigma0", "noise");
  cfg.sigma_w = require_num(jn, "sigma_w", "noise");
  cfg.sigma_v = require_num(jn, "sigma_v", "noise");
  if (cfg.sigma0 <= 0.0 || cfg.sigma_w <= 0.0 || cfg.sigma_v <= 0.0)
    fail("noise sigmas must be positive");
  // Euler-Maruyama convention: per-step disturbance std sigma_w * sqrt(Ts)
  // instead of sigma_w directly. Applies to generation, costs and covariances.
  if (jn.value("sde_scaling", false)) cfg.sigma_w *= std::sqrt(cfg.Ts);
  const bool identical = jn.value("identical_disturbances", false);

  auto& exp = cfg.experiment;
  exp.model = model_by_name(cfg.model_name, cfg.Ts, cfg.c0);
  exp.x0bar = require_vec(jn, "x0bar", "noise");
  if (exp.x0bar.size() != exp.model.n)
    fail("noise.x0bar has " + std::to_string(exp.x0bar.size()) + " entries, model has n=" +
         std::to_string(exp.model.n));
  exp.sigma0 = cfg.sigma0;
  exp.process = parse_channel(jn, "process", cfg.sigma_w);
  exp.measurement = parse_channel(jn, "measurement", cfg.sigma_v);
  exp.set.identical_disturbances = identical;
  exp.set.zero_noise_after = static_cast<int>(opt_num(jn, "zero_noise_after", -1.0, "noise"));

  if (root.contains("experiment")) {
    const auto& je = section(root, "experiment");
    exp.set.N = static_cast<int>(opt_num(je, "N", exp.set.N, "experiment"));
    exp.set.t_f = static_cast<int>(opt_num(je, "t_f", exp.set.t_f, "experiment"));
    exp.set.master_seed =
        static_cast<std::uint64_t>(opt_num(je, "seed", 1.0, "experiment"));
    cfg.out_dir = opt_str(je, "out", "", "experiment");
    if (je.contains("sweep")) {
      const auto& js = je.at("sweep");
      if (!js.is_object()) fail("experiment.sweep must be an object");
      exp.sweep.axis = opt_str(js, "axis", "", "experiment.sweep");
      if (js.contains("values")) {
        const Eigen::VectorXd vals = require_vec(js, "values", "experiment.sweep");
        exp.sweep.values.assign(vals.data(), vals.data() + vals.size());
      }
      if (!exp.sweep.axis.empty() && exp.sweep.values.empty())
        fail("experiment.sweep.values is required with an axis");
    }
  }

  const SolverOptions solver = parse_solver(root);

  // Identical-disturbance studies keep the simulation on the full model (one
  // scalar draw replicated across channels) while the optimization estimators
  // run the reduced single-channel model. The reduced stage loss carries the
  // channel count as a weight factor so its window cost equals the full sum,
  // and the filters keep the full model with the rank-one covariance.
  SystemModel reduced = exp.model;
  double w_weight_factor = 1.0;
  if (identical && cfg.model_name == "linear3") {
    reduced = make_linear_example_shared();
    w_weight_factor = static_cast<double>(exp.model.g);
  }

  // The reactor decays with the contraction rate of its certificate; the
  // linear benchmark uses the published rate.
  const double default_b2 = cfg.model_name == "reactor"
                                ? std::exp(-4.0 * kReactorRateConstant * cfg.c0 * cfg.Ts)
                                : 0.81;

  if (!root.contains("estimators") || !root.at("estimators").is_array())
    fail("config needs an 'estimators' array");
  std::set<std::string> labels;
  for (const auto& je : root.at("estimators")) {
    if (!je.is_object()) fail("estimators entries must be objects");
    const std::string kind = opt_str(je, "kind", "", "estimators[]");

    BenchEstimator est;
    est.config.name = opt_str(je, "name", kind, "estimators[]");
    est.config.x0bar = exp.x0bar;
    est.config.solver = solver;

    if (kind == "fie" || kind == "mhe") {
      est.config.kind = kind == "fie" ? EstimatorKind::Fie : EstimatorKind::Mhe;
      est.config.T = static_cast<int>(opt_num(je, "T", 15.0, "estimators[]"));
      if (est.config.kind == EstimatorKind::Mhe && est.config.T < 1)
        fail("estimators[].T must be >= 1");
      est.model = reduced;

      const json empty = json::object();
      const auto& jc = je.contains("cost") ? je.at("cost") : empty;
      if (!jc.is_object()) fail("estimators[].cost must be an object");
      const std::string preset = opt_str(jc, "preset", "paper", "estimators[].cost");
      if (preset == "classic") {
        est.config.cost = make_classic_cost(cfg.sigma0, cfg.sigma_w, cfg.sigma_v);
      } else if (preset == "paper") {
        const std::string loss = opt_str(jc, "loss_v", "quadratic", "estimators[].cost");
        if (loss != "quadratic" && loss != "one_norm")
          fail("estimators[].cost.loss_v '" + loss + "' unknown");
        est.config.cost = make_paper_cost(
            cfg.sigma0, cfg.sigma_w, cfg.sigma_v,
            opt_num(jc, "lambda_w", 0.99, "estimators[].cost"),
            opt_num(jc, "lambda_v", 0.99, "estimators[].cost"),
            parse_decay(jc, "estimators[].cost", default_b2),
            loss == "quadratic" ? LossKind::Quadratic : LossKind::OneNorm);
      } else {
        fail("estimators[].cost.preset '" + preset + "' unknown");
      }
      est.config.cost.stage.loss_w.weight *= w_weight_factor;
      // The window constraints must admit every value the noise channels can
      // emit; mixture channels reach past the 3-sigma boxes of the presets.
      est.config.cost.bounds.w_radius =
          std::max(est.config.cost.bounds.w_radius, exp.process.support_radius());
      est.config.cost.bounds.v_radius =
          std::max(est.config.cost.bounds.v_radius, exp.measurement.support_radius());
    } else if (kind == "kf" || kind == "ekf") {
      est.config.kind = kind == "kf" ? EstimatorKind::Kf : EstimatorKind::Ekf;
      est.model = exp.model;
      set_gaussian_covariances(est.config, est.model, cfg.sigma0, cfg.sigma_w, cfg.sigma_v);
      if (identical)
        est.config.Q =
            cfg.sigma_w * cfg.sigma_w * Eigen::MatrixXd::Ones(est.model.g, est.model.g);
    } else {
      fail("estimators[].kind '" + kind + "' unknown (expected fie, mhe, kf or ekf)");
    }

    if (!labels.insert(est.config.label()).second)
      fail("duplicate estimator label '" + est.config.label() + "'");
    exp.estimators.push_back(std::move(est));
  }

  if (root.contains("stability")) {
    const auto& js = section(root, "stability");
    cfg.stability.eta = opt_num(js, "eta", 0.5, "stability");
    cfg.stability.estimator = opt_str(js, "estimator", "", "stability");
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("config parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

CertifiedSelection select_certified(const AppConfig& cfg) {
  const auto& ests = cfg.experiment.estimators;
  std::size_t index = ests.size();
  for (std::size_t i = 0; i < ests.size(); ++i) {
    const auto& c = ests[i].config;
    const bool optimizer = c.kind == EstimatorKind::Fie || c.kind == EstimatorKind::Mhe;
    if (!optimizer) continue;
    if (!cfg.stability.estimator.empty()) {
      if (c.label() == cfg.stability.estimator) {
        index = i;
        break;
      }
      continue;
    }
    if (c.cost.certifiable()) {
      index = i;
      break;
    }
  }
  if (index == ests.size()) {
    if (!cfg.stability.estimator.empty())
      fail("stability.estimator '" + cfg.stability.estimator +
           "' matches no optimization estimator");
    fail("no estimator with a certifiable cost configured");
  }
  const auto& chosen = ests[index];
  if (!chosen.config.cost.certifiable())
    fail("estimator '" + chosen.config.label() + "' uses a non-certifiable cost");

  const std::string& model_name = chosen.model.name;
  IossCertificate cert;
  if (model_name == "reactor") {
    cert = reactor_ioss_certificate(kReactorRateConstant, cfg.c0, cfg.Ts);
  } else {
    if (!chosen.model.affine)
      fail("no certificate construction for model '" + model_name + "'");
    cert = linear_ioss_certificate(chosen.model.A);
  }
  // Rational arrival decay needs the certificate in the same family; -ln b1
  // is the tightest rational rate majorizing the exponential one.
  if (chosen.config.cost.arrival.decay.kind == ArrivalDecayKind::Rational &&
      cert.beta.l.family == DecayFamily::Exponential)
    cert = certificate_with_rational_decay(cert, -std::log(cert.beta.l.b));
  return {index, cert};
}

HorizonCertificate horizon_from_config(const AppConfig& cfg) {
  const CertifiedSelection sel = select_certified(cfg);
  const auto& est = cfg.experiment.estimators[sel.index];
  return horizon_for(sel.certificate, est.config.cost, est.model.n, est.model.g, est.model.p,
                     cfg.sigma0, cfg.sigma_w, cfg.sigma_v, cfg.stability.eta, est.model.name,
                     est.config.label());
}

}  // namespace mhekit
