#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhekit/bench.hpp"
#include "mhekit/config.hpp"
#include "mhekit/errors.hpp"
#include "mhekit/stability.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool full = false;
  bool json = false;
  bool strict = false;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

mhekit::AppConfig load(const CliArgs& args) {
  auto cfg = mhekit::load_config(args.config_path);
  if (args.full) cfg.experiment.set.N = 100;
  if (args.seed_set) cfg.experiment.set.master_seed = args.seed;
  if (!args.out.empty()) cfg.out_dir = args.out;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  return cfg;
}

std::filesystem::path ensure_out(const mhekit::AppConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void print_run_header(const mhekit::AppConfig& cfg) {
  std::cout << "model=" << cfg.model_name << " N=" << cfg.experiment.set.N
            << " t_f=" << cfg.experiment.set.t_f << " seed=" << cfg.experiment.set.master_seed
            << "\n";
}

int run_simulate(const CliArgs& args) {
  const auto cfg = load(args);
  const auto& e = cfg.experiment;
  const auto instances =
      mhekit::generate_instances(e.model, e.process, e.measurement, e.x0bar, e.sigma0, e.set);
  const auto dir = ensure_out(cfg);
  const auto path = (dir / "instances.csv").string();
  mhekit::write_instances_csv(path, instances);
  if (args.json) {
    nlohmann::json j{{"model", cfg.model_name},
                     {"N", e.set.N},
                     {"t_f", e.set.t_f},
                     {"seed", e.set.master_seed},
                     {"instances_csv", path}};
    std::cout << j.dump(2) << "\n";
  } else {
    print_run_header(cfg);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int run_estimate(const CliArgs& args, bool with_sweep) {
  auto cfg = load(args);
  if (!with_sweep) cfg.experiment.sweep = {};
  const auto result = mhekit::run_experiment(cfg.experiment);
  const auto dir = ensure_out(cfg);
  const auto traces_path = (dir / "traces.csv").string();
  const auto summary_path = (dir / "summary.csv").string();
  mhekit::write_traces_csv(traces_path, result);
  mhekit::write_summary_csv(summary_path, result.metrics);
  std::string sweep_path;
  if (!result.sweep.empty()) {
    sweep_path = (dir / "sweep.csv").string();
    mhekit::write_sweep_csv(sweep_path, result.sweep);
  }

  if (args.json) {
    nlohmann::json j{{"model", cfg.model_name},
                     {"N", result.metrics.N},
                     {"t_f", result.metrics.t_f},
                     {"seed", cfg.experiment.set.master_seed}};
    for (const auto& row : result.metrics.rows)
      j["estimators"].push_back({{"name", row.estimator},
                                 {"mae", row.mae},
                                 {"unconverged", row.unconverged},
                                 {"mean_solve_ms", row.mean_solve_ms}});
    for (const auto& pt : result.sweep)
      j["sweep"].push_back({{"axis", pt.axis},
                            {"value", pt.value},
                            {"estimator", pt.estimator},
                            {"mae", pt.mae}});
    j["traces_csv"] = traces_path;
    j["summary_csv"] = summary_path;
    if (!sweep_path.empty()) j["sweep_csv"] = sweep_path;
    std::cout << j.dump(2) << "\n";
  } else {
    print_run_header(cfg);
    for (const auto& row : result.metrics.rows)
      std::cout << row.estimator << ": mae=" << fmt(row.mae)
                << " unconverged=" << row.unconverged
                << " mean_solve_ms=" << fmt(row.mean_solve_ms) << "\n";
    std::cout << "wrote " << traces_path << " " << summary_path;
    if (!sweep_path.empty()) std::cout << " " << sweep_path;
    std::cout << "\n";
  }
  if (args.strict && result.metrics.unconverged_total() > 0) {
    std::cerr << "strict: " << result.metrics.unconverged_total()
              << " window solves did not converge\n";
    return 3;
  }
  return 0;
}

int run_horizon(const CliArgs& args) {
  const auto cfg = load(args);
  const auto hc = mhekit::horizon_from_config(cfg);
  if (args.json) {
    nlohmann::json j{{"eta", hc.eta},
                     {"s_bar", hc.s_bar},
                     {"finite", hc.finite},
                     {"margin", hc.margin},
                     {"term_contributions", hc.term_contributions},
                     {"assumptions",
                      {{"M0", hc.assumptions.M0},
                       {"Mw", hc.assumptions.Mw},
                       {"Mv", hc.assumptions.Mv},
                       {"certificate", hc.assumptions.certificate_id},
                       {"cost", hc.assumptions.cost_id}}}};
    j["T_min"] = hc.finite ? nlohmann::json(hc.T_min) : nlohmann::json(nullptr);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "eta=" << fmt(hc.eta) << "\n";
    std::cout << "s_bar=" << fmt(hc.s_bar) << "\n";
    std::cout << "T_min=" << (hc.finite ? std::to_string(hc.T_min) : "infinite") << "\n";
    std::cout << "margin=" << fmt(hc.margin) << "\n";
    for (std::size_t i = 0; i < hc.term_contributions.size(); ++i)
      std::cout << "term_contribution[" << i << "]=" << fmt(hc.term_contributions[i]) << "\n";
  }
  return 0;
}

int run_check(const CliArgs& args) {
  const auto cfg = load(args);
  const auto sel = mhekit::select_certified(cfg);
  const auto& est = cfg.experiment.estimators[sel.index];
  const auto range = mhekit::check_arrival_admissible(sel.certificate, est.config.cost.arrival);

  std::size_t beta_terms = 0, alpha_w_terms = 0, alpha_v_terms = 0;
  mhekit::CertCheck cert_check;
  bool cert_ok = false;
  if (range.pass) {
    const auto env = mhekit::sandwich_bounds(est.config.cost);
    const auto bounds = mhekit::compose_rgas_bounds(sel.certificate, est.config.cost.arrival, env);
    beta_terms = bounds.beta_x.size();
    alpha_w_terms = bounds.alpha_w.size();
    alpha_v_terms = bounds.alpha_v.size();

    const Eigen::VectorXd radius =
        3.0 * cfg.sigma0 * Eigen::VectorXd::Ones(est.model.n);
    cert_check = mhekit::verify_certificate_empirically(
        est.model, sel.certificate, cfg.experiment.x0bar - radius,
        cfg.experiment.x0bar + radius, 3.0 * cfg.sigma_w, 50,
        std::min(cfg.experiment.set.t_f, 60), cfg.experiment.set.master_seed);
    cert_ok = cert_check.max_violation <= 1e-9;
  }

  if (args.json) {
    nlohmann::json j{{"estimator", est.config.label()},
                     {"model", est.model.name},
                     {"b2", est.config.cost.arrival.decay.b},
                     {"admissible", range.pass},
                     {"admissible_lo", range.lo},
                     {"admissible_hi", range.hi},
                     {"admissibility_margin", range.margin}};
    if (range.pass) {
      j["beta_x_terms"] = beta_terms;
      j["alpha_w_terms"] = alpha_w_terms;
      j["alpha_v_terms"] = alpha_v_terms;
      j["certificate_pairs"] = cert_check.pairs;
      j["certificate_max_violation"] = cert_check.max_violation;
      j["certificate_ok"] = cert_ok;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "estimator=" << est.config.label() << "\n";
    std::cout << "model=" << est.model.name << "\n";
    std::cout << "b2=" << fmt(est.config.cost.arrival.decay.b) << "\n";
    std::cout << "admissible=" << (range.pass ? "true" : "false") << "\n";
    std::cout << "admissible_range=[" << fmt(range.lo) << "," << fmt(range.hi) << ")\n";
    std::cout << "admissibility_margin=" << fmt(range.margin) << "\n";
    if (range.pass) {
      std::cout << "beta_x_terms=" << beta_terms << "\n";
      std::cout << "alpha_w_terms=" << alpha_w_terms << "\n";
      std::cout << "alpha_v_terms=" << alpha_v_terms << "\n";
      std::cout << "certificate_pairs=" << cert_check.pairs << "\n";
      std::cout << "certificate_max_violation=" << fmt(cert_check.max_violation) << "\n";
      std::cout << "certificate_ok=" << (cert_ok ? "true" : "false") << "\n";
    }
  }
  return range.pass && cert_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-horizon estimation toolkit"};
  app.fallthrough();
  CliArgs args;
  app.add_option("--config", args.config_path, "JSON config file")->required();
  auto* seed_opt = app.add_option("--seed", args.seed, "override the instance master seed");
  app.add_option("--out", args.out, "output directory (overrides experiment.out)");
  app.add_flag("--full", args.full, "paper-scale Monte Carlo (N=100)");
  app.add_flag("--json", args.json, "machine-readable output");
  app.add_flag("--strict", args.strict, "exit 3 when any window solve fails to converge");

  auto* sim = app.add_subcommand("simulate", "draw the instance set, write instances.csv");
  auto* est = app.add_subcommand("estimate", "run estimators, write traces.csv and summary.csv");
  auto* ben = app.add_subcommand("bench", "estimate plus the configured sweep, write sweep.csv");
  auto* hor = app.add_subcommand("horizon", "minimal certified horizon for the configured cost");
  auto* chk = app.add_subcommand("check-stability",
                                 "admissibility and certificate checks for the configured cost");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    if (*sim) return run_simulate(args);
    if (*est) return run_estimate(args, false);
    if (*ben) return run_estimate(args, true);
    if (*hor) return run_horizon(args);
    if (*chk) return run_check(args);
  } catch (const mhekit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
