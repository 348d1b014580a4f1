#include "mhekit/cost.hpp"

#include <algorithm>
#include <cmath>

namespace mhekit {

double LossSpec::operator()(const Eigen::VectorXd& u) const {
  if (!(weight > 0.0)) throw std::invalid_argument("LossSpec: weight must be positive");
  return kind == LossKind::Quadratic ? weight * u.squaredNorm() : weight * u.lpNorm<1>();
}

ArrivalDecay ArrivalDecay::none() { return ArrivalDecay{ArrivalDecayKind::None, 1.0}; }

ArrivalDecay ArrivalDecay::exponential(double b) {
  if (!(b > 0.0 && b < 1.0))
    throw std::invalid_argument("ArrivalDecay: exponential base must be in (0,1)");
  return ArrivalDecay{ArrivalDecayKind::Exponential, b};
}

ArrivalDecay ArrivalDecay::rational(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("ArrivalDecay: rational exponent must be positive");
  return ArrivalDecay{ArrivalDecayKind::Rational, b};
}

double ArrivalDecay::eval(double T) const {
  if (T < 0.0) throw std::invalid_argument("ArrivalDecay: negative time");
  switch (kind) {
    case ArrivalDecayKind::None:
      return 1.0;
    case ArrivalDecayKind::Exponential:
      return std::pow(b, T);
    case ArrivalDecayKind::Rational:
      return std::pow(T + 1.0, -b);
  }
  return 1.0;
}

DecayL ArrivalDecay::as_decay() const {
  switch (kind) {
    case ArrivalDecayKind::Exponential:
      return DecayL::exponential(b);
    case ArrivalDecayKind::Rational:
      return DecayL::rational(b);
    case ArrivalDecayKind::None:
      break;
  }
  throw std::invalid_argument("ArrivalDecay: constant arrival has no decay function");
}

double ArrivalCostSpec::eval(const Eigen::VectorXd& d, double decay_time) const {
  if (!(c2 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("ArrivalCostSpec: c2, a2 positive");
  return c2 * std::pow(d.norm(), a2) * decay.eval(decay_time);
}

bool CostSpec::certifiable() const {
  return stage.averaged && stage.lambda_w < 1.0 && stage.lambda_v < 1.0 &&
         arrival.decay.kind != ArrivalDecayKind::None;
}

double eval_cost(const CostSpec& spec, int T, const Eigen::VectorXd& d0,
                 const std::vector<Eigen::VectorXd>& omega,
                 const std::vector<Eigen::VectorXd>& nu, double decay_time) {
  if (T < 0) throw std::invalid_argument("eval_cost: negative window length");
  if (static_cast<int>(omega.size()) != T)
    throw std::invalid_argument("eval_cost: omega must have T entries");
  if (static_cast<int>(nu.size()) != T + 1)
    throw std::invalid_argument("eval_cost: nu must have T+1 entries");
  const StageCostSpec& st = spec.stage;
  if (!(st.lambda_w >= 0.0 && st.lambda_w <= 1.0 && st.lambda_v >= 0.0 && st.lambda_v <= 1.0))
    throw std::invalid_argument("eval_cost: lambdas must be in [0,1]");

  double value = spec.arrival.eval(d0, decay_time);

  if (T > 0) {
    double sum_w = 0.0, max_w = 0.0;
    for (const auto& wk : omega) {
      const double l = st.loss_w(wk);
      sum_w += l;
      max_w = std::max(max_w, l);
    }
    value += (st.averaged ? st.lambda_w / T : 1.0) * sum_w;
    if (st.averaged) value += (1.0 - st.lambda_w) * max_w;
  }

  double sum_v = 0.0, max_v = 0.0;
  for (const auto& nk : nu) {
    const double l = st.loss_v(nk);
    sum_v += l;
    max_v = std::max(max_v, l);
  }
  value += (st.averaged ? st.lambda_v / (T + 1) : 1.0) * sum_v;
  if (st.averaged) value += (1.0 - st.lambda_v) * max_v;

  return value;
}

double eval_cost(const CostSpec& spec, int T, const Eigen::VectorXd& d0,
                 const std::vector<Eigen::VectorXd>& omega,
                 const std::vector<Eigen::VectorXd>& nu) {
  return eval_cost(spec, T, d0, omega, nu, static_cast<double>(T));
}

Sandwich sandwich_bounds(const CostSpec& spec) {
  const StageCostSpec& st = spec.stage;
  if (!st.averaged)
    throw DegenerateLowerBound("sandwich_bounds: classic preset has no certified envelopes");
  if (st.lambda_w >= 1.0 || st.lambda_v >= 1.0)
    throw DegenerateLowerBound("sandwich_bounds: lambda = 1 leaves no lower envelope");

  Sandwich s;
  s.arrival = PowerK(spec.arrival.c2, spec.arrival.a2);
  s.gamma_w_lo = PowerK((1.0 - st.lambda_w) * st.loss_w.weight, st.loss_w.norm_power());
  s.gamma_w_hi = PowerK(st.loss_w.weight, st.loss_w.norm_power());
  s.gamma_v_lo = PowerK((1.0 - st.lambda_v) * st.loss_v.weight, st.loss_v.norm_power());
  s.gamma_v_hi = PowerK(st.loss_v.weight, st.loss_v.norm_power());
  return s;
}

CostSpec make_classic_cost(double sigma0, double sigma_w, double sigma_v) {
  if (!(sigma0 > 0.0 && sigma_w > 0.0 && sigma_v > 0.0))
    throw std::invalid_argument("make_classic_cost: sigmas must be positive");
  CostSpec c;
  c.arrival = ArrivalCostSpec{1.0 / (sigma0 * sigma0), 2.0, ArrivalDecay::none()};
  c.stage.lambda_w = 1.0;
  c.stage.lambda_v = 1.0;
  c.stage.averaged = false;
  c.stage.loss_w = LossSpec{LossKind::Quadratic, 1.0 / (sigma_w * sigma_w)};
  c.stage.loss_v = LossSpec{LossKind::Quadratic, 1.0 / (sigma_v * sigma_v)};
  c.bounds = CostBounds{StateBoundKind::Box, 100.0 * sigma0, 100.0 * sigma_w, 100.0 * sigma_v};
  return c;
}

CostSpec make_paper_cost(double sigma0, double sigma_w, double sigma_v, double lambda_w,
                         double lambda_v, const ArrivalDecay& decay, LossKind loss_v) {
  if (!(sigma0 > 0.0 && sigma_w > 0.0 && sigma_v > 0.0))
    throw std::invalid_argument("make_paper_cost: sigmas must be positive");
  if (!(lambda_w >= 0.0 && lambda_w <= 1.0 && lambda_v >= 0.0 && lambda_v <= 1.0))
    throw std::invalid_argument("make_paper_cost: lambdas must be in [0,1]");
  CostSpec c;
  c.arrival = ArrivalCostSpec{1.0 / (sigma0 * sigma0), 2.0, decay};
  c.stage.lambda_w = lambda_w;
  c.stage.lambda_v = lambda_v;
  c.stage.averaged = true;
  c.stage.loss_w = LossSpec{LossKind::Quadratic, 1.0 / (sigma_w * sigma_w)};
  c.stage.loss_v = loss_v == LossKind::Quadratic
                       ? LossSpec{LossKind::Quadratic, 1.0 / (sigma_v * sigma_v)}
                       : LossSpec{LossKind::OneNorm, 1.0 / sigma_v};
  c.bounds = CostBounds{StateBoundKind::Box, 3.0 * sigma0, 3.0 * sigma_w, 3.0 * sigma_v};
  return c;
}

}  // namespace mhekit
