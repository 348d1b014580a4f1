#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mhekit/errors.hpp"

namespace mhekit {

struct SystemModel;

// Deterministic RNG: splitmix64-expanded seed feeding xoshiro256**, Gaussians
// via Box-Muller on uniforms. Self-contained so that streams are bit-identical
// across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t u64();
  double uniform();   // [0, 1)
  double gaussian();  // N(0, 1)

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class NoiseKind { TruncGauss, MixedTruncGauss };

// Scalar noise channel. TruncGauss: N(0, sigma^2) truncated at +-3 sigma by
// rejection. MixedTruncGauss: with probability p_nominal the nominal component
// is active, otherwise a scaled component N(0, (scale*sigma)^2); each draw is
// truncated at +-3 sigma of the active component.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::TruncGauss;
  double sigma = 1.0;
  double scale = 10.0;
  double p_nominal = 0.9;

  static NoiseSpec trunc_gauss(double sigma);
  static NoiseSpec mixed_trunc_gauss(double sigma, double scale = 10.0, double p_nominal = 0.9);

  // Largest magnitude the channel can emit (support bound).
  double support_radius() const;
};

// One scalar draw; `outlier` (optional) reports whether the scaled mixture
// component was active.
double sample_noise(const NoiseSpec& spec, Rng& rng, bool* outlier = nullptr);

// rows x cols matrix of independent draws; optional row-major outlier mask.
Eigen::MatrixXd sample_noise(const NoiseSpec& spec, int rows, int cols, Rng& rng,
                             std::vector<std::uint8_t>* outlier_mask = nullptr);

// Simulated ground-truth trajectory plus everything the estimators consume.
struct TrajectoryInstance {
  Eigen::MatrixXd x;  // (t_f+1) x n true states
  Eigen::MatrixXd y;  // (t_f+1) x p measurements
  Eigen::MatrixXd w;  // t_f x g process disturbances
  Eigen::MatrixXd v;  // (t_f+1) x p measurement noise
  std::uint64_t seed = 0;
};

struct InstanceSet {
  int N = 20;
  int t_f = 60;
  std::uint64_t master_seed = 1;
  // When >= 0, w_t and v_t are zeroed for t >= zero_noise_after.
  int zero_noise_after = -1;
  // When true, each step's process disturbance is one scalar draw replicated
  // across all g channels.
  bool identical_disturbances = false;
};

// Per-instance seeds derive from the master by seed_i = master ^ i; each feeds
// an independent counter-expanded stream, so regeneration is bit-identical and
// instances are order-independent.
std::vector<TrajectoryInstance> generate_instances(const SystemModel& model,
                                                   const NoiseSpec& process,
                                                   const NoiseSpec& meas,
                                                   const Eigen::VectorXd& x0bar, double sigma0,
                                                   const InstanceSet& set);

}  // namespace mhekit
