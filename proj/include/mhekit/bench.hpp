#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mhekit/estimators.hpp"
#include "mhekit/stochastics.hpp"
#include "mhekit/systems.hpp"

namespace mhekit {

// One estimator entry of an experiment. Each entry carries its own model so
// deliberate model mismatch (e.g. a filter running on the full-disturbance
// model while the instances come from a reduced one) is expressible.
struct BenchEstimator {
  SystemModel model;
  EstimatorConfig config;
};

// Sweep over one scalar knob of the optimization estimators. "T" rewrites the
// horizon, "b2" the arrival decay rate, "lambda" both stage mixing weights.
struct SweepSpec {
  std::string axis;  // empty = no sweep
  std::vector<double> values;
};

struct ExperimentSpec {
  SystemModel model;  // generates the instances
  NoiseSpec process;
  NoiseSpec measurement;
  Eigen::VectorXd x0bar;
  double sigma0 = 1.0;
  InstanceSet set;
  std::vector<BenchEstimator> estimators;
  SweepSpec sweep;
};

// Aggregates over one estimator's N traces.
struct MetricsRow {
  std::string estimator;
  double mae = 0.0;
  int unconverged = 0;          // flagged steps across all instances
  double total_solve_ms = 0.0;  // wall-clock, excluded from summary.csv
  double mean_solve_ms = 0.0;
  Eigen::MatrixXd mean_error;   // (t_f+1) x n, signed mean across instances
  Eigen::MatrixXd std_error;    // per-time, per-state std across instances
};

struct MetricsTable {
  int N = 0;
  int t_f = 0;
  std::vector<MetricsRow> rows;
  int unconverged_total() const;
};

struct SweepPoint {
  std::string axis;
  double value = 0.0;
  std::string estimator;
  double mae = 0.0;
};

struct ExperimentResult {
  std::vector<TrajectoryInstance> instances;
  std::vector<std::vector<EstimateTrace>> traces;  // [estimator][instance]
  MetricsTable metrics;
  std::vector<SweepPoint> sweep;
};

// MAE over a set of traces per the displayed formula: coordinate errors are
// summed, not averaged over the state dimension.
double mae(const std::vector<EstimateTrace>& traces);

MetricsRow reduce_traces(const std::vector<EstimateTrace>& traces);

// Runs every estimator on the same instances (paired comparison). Per-step
// solver failures stay in the traces flagged, never dropped.
std::vector<std::vector<EstimateTrace>> run_paired(
    const std::vector<BenchEstimator>& estimators,
    const std::vector<TrajectoryInstance>& instances);

// Full experiment: draw the instance set once from the spec's seed, run the
// base estimator list, then re-run per sweep value with the axis rewritten.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// CSV writers. Numbers are printed with %.12g so identical inputs produce
// byte-identical files; summary.csv carries no timing for the same reason.
void write_instances_csv(const std::string& path,
                         const std::vector<TrajectoryInstance>& instances);
void write_traces_csv(const std::string& path, const ExperimentResult& result);
void write_summary_csv(const std::string& path, const MetricsTable& metrics);
void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& sweep);

}  // namespace mhekit
