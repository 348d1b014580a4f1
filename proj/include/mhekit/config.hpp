#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "mhekit/bench.hpp"
#include "mhekit/stability.hpp"

namespace mhekit {

struct StabilitySpec {
  double eta = 0.5;
  // Label of the estimator whose cost gets certified; empty picks the first
  // certifiable optimization estimator.
  std::string estimator;
};

// Everything a run needs, assembled from one JSON file with sections
// {model, noise, estimators[], experiment, solver} plus an optional
// {stability} section for the horizon tooling.
struct AppConfig {
  ExperimentSpec experiment;
  StabilitySpec stability;
  std::string out_dir;

  // Retained from the noise/model sections for certificate construction.
  double sigma0 = 1.0;
  double sigma_w = 1.0;
  double sigma_v = 1.0;
  std::string model_name;
  double Ts = 0.1;
  double c0 = 0.1;
};

// Both throw ConfigError on malformed input (CLI exit code 2).
AppConfig parse_config(const nlohmann::json& j);
AppConfig load_config(const std::string& path);

// The estimator selected for certification plus the model's i-IOSS
// certificate, loosened to the rational family when that estimator's arrival
// decay is rational.
struct CertifiedSelection {
  std::size_t index = 0;  // into experiment.estimators
  IossCertificate certificate;
};
CertifiedSelection select_certified(const AppConfig& cfg);

// End-to-end Theorem-2 pipeline on the selected estimator.
HorizonCertificate horizon_from_config(const AppConfig& cfg);

}  // namespace mhekit
