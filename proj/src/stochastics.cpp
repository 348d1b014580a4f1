#include "mhekit/stochastics.hpp"

#include <cmath>

#include "mhekit/systems.hpp"

namespace mhekit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::u64() {
  // xoshiro256**
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

NoiseSpec NoiseSpec::trunc_gauss(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be positive");
  NoiseSpec s;
  s.kind = NoiseKind::TruncGauss;
  s.sigma = sigma;
  return s;
}

NoiseSpec NoiseSpec::mixed_trunc_gauss(double sigma, double scale, double p_nominal) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be positive");
  if (!(scale > 0.0)) throw std::invalid_argument("NoiseSpec: scale must be positive");
  if (!(p_nominal >= 0.0 && p_nominal <= 1.0))
    throw std::invalid_argument("NoiseSpec: p_nominal must be in [0,1]");
  NoiseSpec s;
  s.kind = NoiseKind::MixedTruncGauss;
  s.sigma = sigma;
  s.scale = scale;
  s.p_nominal = p_nominal;
  return s;
}

double NoiseSpec::support_radius() const {
  return kind == NoiseKind::TruncGauss ? 3.0 * sigma : 3.0 * scale * sigma;
}

double sample_noise(const NoiseSpec& spec, Rng& rng, bool* outlier) {
  double sigma = spec.sigma;
  bool big = false;
  if (spec.kind == NoiseKind::MixedTruncGauss) {
    big = rng.uniform() >= spec.p_nominal;
    if (big) sigma *= spec.scale;
  }
  if (outlier) *outlier = big;
  // Rejection at +-3 sigma of the active component; acceptance ~99.7%.
  for (;;) {
    const double z = rng.gaussian();
    if (std::abs(z) <= 3.0) return sigma * z;
  }
}

Eigen::MatrixXd sample_noise(const NoiseSpec& spec, int rows, int cols, Rng& rng,
                             std::vector<std::uint8_t>* outlier_mask) {
  Eigen::MatrixXd out(rows, cols);
  if (outlier_mask) outlier_mask->assign(static_cast<std::size_t>(rows) * cols, 0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      bool big = false;
      out(i, j) = sample_noise(spec, rng, &big);
      if (outlier_mask && big) (*outlier_mask)[static_cast<std::size_t>(i) * cols + j] = 1;
    }
  }
  return out;
}

std::vector<TrajectoryInstance> generate_instances(const SystemModel& model,
                                                   const NoiseSpec& process, const NoiseSpec& meas,
                                                   const Eigen::VectorXd& x0bar, double sigma0,
                                                   const InstanceSet& set) {
  if (x0bar.size() != model.n) throw std::invalid_argument("generate_instances: x0bar size");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("generate_instances: sigma0 must be positive");
  if (set.N < 1 || set.t_f < 0) throw std::invalid_argument("generate_instances: bad set sizes");

  const NoiseSpec init = NoiseSpec::trunc_gauss(sigma0);
  std::vector<TrajectoryInstance> out;
  out.reserve(set.N);

  for (int i = 0; i < set.N; ++i) {
    const std::uint64_t seed_i = set.master_seed ^ static_cast<std::uint64_t>(i);
    Rng rng(seed_i);

    TrajectoryInstance inst;
    inst.seed = seed_i;

    // Initial state: prior +- truncated Gaussian per element, resampled as a
    // whole until it lands in the admissible box.
    Eigen::VectorXd x0(model.n);
    for (int tries = 0;; ++tries) {
      for (int j = 0; j < model.n; ++j) x0(j) = x0bar(j) + sample_noise(init, rng);
      if (model.in_admissible_box(x0)) break;
      if (tries > 100000)
        throw std::invalid_argument("generate_instances: admissible box rejects all draws");
    }

    inst.w.resize(set.t_f, model.g);
    for (int t = 0; t < set.t_f; ++t) {
      if (set.identical_disturbances) {
        const double s = sample_noise(process, rng);
        inst.w.row(t).setConstant(s);
      } else {
        for (int j = 0; j < model.g; ++j) inst.w(t, j) = sample_noise(process, rng);
      }
      if (set.zero_noise_after >= 0 && t >= set.zero_noise_after) inst.w.row(t).setZero();
    }

    inst.v.resize(set.t_f + 1, model.p);
    for (int t = 0; t <= set.t_f; ++t) {
      for (int j = 0; j < model.p; ++j) inst.v(t, j) = sample_noise(meas, rng);
      if (set.zero_noise_after >= 0 && t >= set.zero_noise_after) inst.v.row(t).setZero();
    }

    inst.x.resize(set.t_f + 1, model.n);
    inst.y.resize(set.t_f + 1, model.p);
    inst.x.row(0) = x0.transpose();
    for (int t = 0; t < set.t_f; ++t)
      inst.x.row(t + 1) = model.f(inst.x.row(t).transpose(), inst.w.row(t).transpose()).transpose();
    for (int t = 0; t <= set.t_f; ++t)
      inst.y.row(t) = (model.h(inst.x.row(t).transpose()) + inst.v.row(t).transpose()).transpose();

    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace mhekit
