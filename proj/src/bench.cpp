#include "mhekit/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mhekit/errors.hpp"

namespace mhekit {

namespace {

// %.12g keeps files byte-identical across runs of the same config + seed
// while staying shorter than full round-trip precision.
std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void check_same_shape(const std::vector<EstimateTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("no traces");
  const auto rows = traces.front().error.rows();
  const auto cols = traces.front().error.cols();
  for (const auto& tr : traces) {
    if (tr.error.rows() != rows || tr.error.cols() != cols)
      throw std::invalid_argument("traces have mismatched lengths");
  }
}

void apply_axis(std::vector<BenchEstimator>& estimators, const std::string& axis, double value) {
  if (axis != "T" && axis != "b2" && axis != "lambda")
    throw ConfigError("unknown sweep axis '" + axis + "' (expected T, b2 or lambda)");
  bool hit = false;
  for (auto& e : estimators) {
    auto& cfg = e.config;
    if (cfg.kind != EstimatorKind::Mhe && cfg.kind != EstimatorKind::Fie) continue;
    if (axis == "T") {
      if (cfg.kind != EstimatorKind::Mhe) continue;
      const int T = static_cast<int>(std::lround(value));
      if (T < 1) throw ConfigError("sweep value T=" + fmt(value) + " is not a horizon >= 1");
      cfg.T = T;
    } else if (axis == "b2") {
      auto& decay = cfg.cost.arrival.decay;
      if (decay.kind == ArrivalDecayKind::None) continue;
      if (value <= 0.0 || (decay.kind == ArrivalDecayKind::Exponential && value >= 1.0))
        throw ConfigError("sweep value b2=" + fmt(value) + " outside the decay's range");
      decay.b = value;
    } else {
      if (value < 0.0 || value > 1.0)
        throw ConfigError("sweep value lambda=" + fmt(value) + " outside [0, 1]");
      cfg.cost.stage.lambda_w = value;
      cfg.cost.stage.lambda_v = value;
    }
    hit = true;
  }
  if (!hit) throw ConfigError("sweep axis '" + axis + "' applies to no configured estimator");
}

}  // namespace

int MetricsTable::unconverged_total() const {
  int total = 0;
  for (const auto& row : rows) total += row.unconverged;
  return total;
}

double mae(const std::vector<EstimateTrace>& traces) {
  check_same_shape(traces);
  double sum = 0.0;
  for (const auto& tr : traces) sum += tr.error.cwiseAbs().sum();
  const double samples = static_cast<double>(traces.size()) *
                         static_cast<double>(traces.front().error.rows());
  return sum / samples;
}

MetricsRow reduce_traces(const std::vector<EstimateTrace>& traces) {
  check_same_shape(traces);
  const int N = static_cast<int>(traces.size());
  const auto rows = traces.front().error.rows();
  const auto cols = traces.front().error.cols();

  MetricsRow out;
  out.estimator = traces.front().estimator;
  out.mae = mae(traces);
  out.mean_error = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& tr : traces) {
    out.mean_error += tr.error;
    out.unconverged += tr.unconverged_steps();
    out.total_solve_ms += tr.solve_ms.sum();
  }
  out.mean_error /= N;
  out.mean_solve_ms = out.total_solve_ms / (static_cast<double>(N) * static_cast<double>(rows));

  out.std_error = Eigen::MatrixXd::Zero(rows, cols);
  if (N > 1) {
    for (const auto& tr : traces)
      out.std_error += (tr.error - out.mean_error).array().square().matrix();
    out.std_error = (out.std_error / (N - 1)).cwiseSqrt();
  }
  return out;
}

std::vector<std::vector<EstimateTrace>> run_paired(
    const std::vector<BenchEstimator>& estimators,
    const std::vector<TrajectoryInstance>& instances) {
  std::vector<std::vector<EstimateTrace>> traces(estimators.size());
  for (std::size_t k = 0; k < estimators.size(); ++k) {
    traces[k].reserve(instances.size());
    for (const auto& instance : instances)
      traces[k].push_back(run_estimator(estimators[k].model, estimators[k].config, instance));
  }
  return traces;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.estimators.empty()) throw ConfigError("experiment configures no estimators");
  if (spec.set.N < 1 || spec.set.t_f < 1)
    throw ConfigError("experiment needs N >= 1 and t_f >= 1");

  ExperimentResult result;
  result.instances = generate_instances(spec.model, spec.process, spec.measurement, spec.x0bar,
                                        spec.sigma0, spec.set);
  result.traces = run_paired(spec.estimators, result.instances);

  result.metrics.N = spec.set.N;
  result.metrics.t_f = spec.set.t_f;
  for (const auto& per_estimator : result.traces)
    result.metrics.rows.push_back(reduce_traces(per_estimator));

  if (!spec.sweep.axis.empty()) {
    if (spec.sweep.values.empty())
      throw ConfigError("sweep axis '" + spec.sweep.axis + "' has no values");
    for (double value : spec.sweep.values) {
      auto swept = spec.estimators;
      apply_axis(swept, spec.sweep.axis, value);
      const auto traces = run_paired(swept, result.instances);
      for (std::size_t k = 0; k < swept.size(); ++k)
        result.sweep.push_back(
            {spec.sweep.axis, value, swept[k].config.label(), mae(traces[k])});
    }
  }
  return result;
}

void write_instances_csv(const std::string& path,
                         const std::vector<TrajectoryInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  auto out = open_csv(path);
  const auto n = instances.front().x.cols();
  const auto p = instances.front().y.cols();
  const auto g = instances.front().w.cols();

  out << "instance,t";
  for (int j = 0; j < n; ++j) out << ",x" << j;
  for (int j = 0; j < p; ++j) out << ",y" << j;
  for (int j = 0; j < g; ++j) out << ",w" << j;
  for (int j = 0; j < p; ++j) out << ",v" << j;
  out << "\n";

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    for (Eigen::Index t = 0; t < inst.x.rows(); ++t) {
      out << i << "," << t;
      for (int j = 0; j < n; ++j) out << "," << fmt(inst.x(t, j));
      for (int j = 0; j < p; ++j) out << "," << fmt(inst.y(t, j));
      // The final state has no outgoing transition; its w row prints as zero.
      for (int j = 0; j < g; ++j) out << "," << fmt(t < inst.w.rows() ? inst.w(t, j) : 0.0);
      for (int j = 0; j < p; ++j) out << "," << fmt(inst.v(t, j));
      out << "\n";
    }
  }
}

void write_traces_csv(const std::string& path, const ExperimentResult& result) {
  if (result.traces.empty() || result.traces.front().empty())
    throw std::invalid_argument("no traces");
  auto out = open_csv(path);
  const auto n = result.traces.front().front().xhat.cols();

  out << "instance,t,estimator";
  for (int j = 0; j < n; ++j) out << ",xhat" << j;
  for (int j = 0; j < n; ++j) out << ",e" << j;
  out << ",converged,solve_ms\n";

  const std::size_t N = result.traces.front().size();
  for (std::size_t i = 0; i < N; ++i) {
    const auto rows = result.traces.front()[i].xhat.rows();
    for (Eigen::Index t = 0; t < rows; ++t) {
      for (const auto& per_estimator : result.traces) {
        const auto& tr = per_estimator[i];
        out << i << "," << t << "," << tr.estimator;
        for (int j = 0; j < n; ++j) out << "," << fmt(tr.xhat(t, j));
        for (int j = 0; j < n; ++j) out << "," << fmt(tr.error(t, j));
        out << "," << static_cast<int>(tr.converged[static_cast<std::size_t>(t)]) << ","
            << fmt(tr.solve_ms(t)) << "\n";
      }
    }
  }
}

void write_summary_csv(const std::string& path, const MetricsTable& metrics) {
  auto out = open_csv(path);
  out << "estimator,mae,unconverged,N,t_f\n";
  for (const auto& row : metrics.rows)
    out << row.estimator << "," << fmt(row.mae) << "," << row.unconverged << "," << metrics.N
        << "," << metrics.t_f << "\n";
  out << "# unconverged_total=" << metrics.unconverged_total() << "\n";
}

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& sweep) {
  auto out = open_csv(path);
  out << "sweep_axis,value,estimator,mae\n";
  for (const auto& point : sweep)
    out << point.axis << "," << fmt(point.value) << "," << point.estimator << ","
        << fmt(point.mae) << "\n";
}

}  // namespace mhekit
