// Command-line front end: fit a dataset, run simulation campaigns, or
// validate inputs without fitting.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "drlogit/drlogit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string data_path;
  std::string outcome = "y";
  std::string exposure = "a";
  std::string method = "lowdim";
  std::string link = "identity";
  std::string phi = "none";
  std::string learner = "ridge";
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double level = 0.95;
  int threads = 0;  // 0 = resolve from env / hardware
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("DRLOGIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Known configuration keys; anything else is rejected.
void apply_config(const nlohmann::json& cfg, drlogit::EstimatorSpec& spec) {
  static const std::set<std::string> known = {
      "lambda_alpha", "lambda_gamma", "lambda_init", "auto_constant",
      "max_outer",    "tol_outer",    "k_outer",     "k_inner",
      "r_variant",    "prob_clip",    "phi_nodes",   "learner_params"};
  for (const auto& [key, value] : cfg.items()) {
    if (!known.count(key))
      throw drlogit::ValidationError("unknown config key: " + key);
    if (key == "lambda_alpha") spec.hd.lambda_alpha = value.get<double>();
    else if (key == "lambda_gamma") spec.hd.lambda_gamma = value.get<double>();
    else if (key == "lambda_init") spec.hd.lambda_init = value.get<double>();
    else if (key == "auto_constant") spec.hd.auto_constant = value.get<double>();
    else if (key == "max_outer") spec.hd.max_outer = value.get<int>();
    else if (key == "tol_outer") spec.hd.tol_outer = value.get<double>();
    else if (key == "k_outer") spec.refit.k_outer = value.get<int>();
    else if (key == "k_inner") spec.refit.k_inner = value.get<int>();
    else if (key == "prob_clip") spec.refit.prob_clip = value.get<double>();
    else if (key == "phi_nodes") spec.phi.nodes = value.get<int>();
    else if (key == "r_variant") {
      const auto v = value.get<std::string>();
      if (v == "t_refit") spec.refit.r_variant = drlogit::RVariant::t_refit;
      else if (v == "ratio_refit")
        spec.refit.r_variant = drlogit::RVariant::ratio_refit;
      else throw drlogit::ValidationError("unknown r_variant: " + v);
    } else if (key == "learner_params") {
      for (const auto& [pk, pv] : value.items())
        spec.learner_params[pk] = pv.get<double>();
    }
  }
}

drlogit::EstimatorSpec build_estimator(const CommonOpts& opts) {
  drlogit::EstimatorSpec spec;
  if (opts.method == "lowdim") spec.kind = drlogit::EstimatorKind::lowdim;
  else if (opts.method == "hd") spec.kind = drlogit::EstimatorKind::hd;
  else if (opts.method == "ml") spec.kind = drlogit::EstimatorKind::ml;
  else throw drlogit::ValidationError("unknown method: " + opts.method);
  spec.link = drlogit::LinkFunction::from_name(opts.link);
  spec.phi.kind = drlogit::phi_kind_from_name(opts.phi);
  spec.learner_name = opts.learner;
  spec.level = opts.level;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in)
      throw drlogit::ValidationError("cannot open config: " + opts.config_path);
    nlohmann::json cfg;
    try {
      in >> cfg;
    } catch (const nlohmann::json::exception& e) {
      throw drlogit::ValidationError(std::string("bad config JSON: ") +
                                     e.what());
    }
    apply_config(cfg, spec);
  }
  return spec;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write: " + out_path);
    out << j.dump(2) << '\n';
  }
}

int cmd_fit(const CommonOpts& opts) {
  const auto data =
      drlogit::read_csv_dataset(opts.data_path, opts.outcome, opts.exposure);
  const auto spec = build_estimator(opts);
  const auto report = drlogit::run_estimator(data, spec, opts.seed);
  emit(drlogit::report_to_json(report, data.n(), data.p()), opts.out_path);
  return kExitOk;
}

int cmd_validate(const CommonOpts& opts) {
  const auto data =
      drlogit::read_csv_dataset(opts.data_path, opts.outcome, opts.exposure);
  if (!opts.config_path.empty()) build_estimator(opts);
  std::cout << "ok: " << data.n() << " rows, " << data.p() << " covariates"
            << std::endl;
  return kExitOk;
}

struct SimulateOpts {
  std::string scenario = "both_correct";
  int reps = 100;
  Eigen::Index n = 1000;
  Eigen::Index p = 5;
  double beta0 = 0.5;
  std::string dgp = "cond_gaussian";
};

int cmd_simulate(const CommonOpts& opts, const SimulateOpts& sim) {
  const auto scenario = drlogit::scenario_from_name(sim.scenario);
  drlogit::DgpSpec dgp = drlogit::DgpSpec::canonical(sim.n, sim.p, sim.beta0);
  if (sim.dgp == "cond_gaussian") dgp.kind = drlogit::DgpKind::cond_gaussian;
  else if (sim.dgp == "logistic_linear")
    dgp.kind = drlogit::DgpKind::logistic_linear;
  else if (sim.dgp == "nonlinear") dgp.kind = drlogit::DgpKind::nonlinear;
  else throw drlogit::ValidationError("unknown dgp: " + sim.dgp);

  drlogit::ScenarioConfig cfg;
  cfg.estimator = build_estimator(opts);
  cfg.scenario = scenario;
  cfg.replicates = sim.reps;
  cfg.level = opts.level;
  cfg.seed = opts.seed;
  cfg.threads = resolve_threads(opts.threads);
  const auto result = drlogit::run_monte_carlo(cfg, dgp);

  const std::string base = opts.out_path.empty() ? "simulate" : opts.out_path;
  drlogit::write_monte_carlo_csv(result, base + ".csv");
  emit(drlogit::monte_carlo_summary_json(result, scenario), base + ".json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly robust logistic partially linear model estimation"};
  app.require_subcommand(1);

  CommonOpts opts;
  SimulateOpts sim;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    auto* d = cmd->add_option("--data", opts.data_path, "input CSV path");
    if (needs_data) d->required();
    cmd->add_option("--outcome", opts.outcome, "outcome column name");
    cmd->add_option("--exposure", opts.exposure, "exposure column name");
    cmd->add_option("--method", opts.method, "lowdim|hd|ml");
    cmd->add_option("--link", opts.link, "identity|expit|exp");
    cmd->add_option("--phi", opts.phi, "none|simp|opt");
    cmd->add_option("--learner", opts.learner, "ridge|lasso|knn|forest");
    cmd->add_option("--config", opts.config_path, "JSON config path");
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--level", opts.level, "confidence level");
    cmd->add_option("--out", opts.out_path, "output path");
    cmd->add_option("--threads", opts.threads,
                    "worker threads (DRLOGIT_THREADS as fallback)");
  };

  auto* fit = app.add_subcommand("fit", "estimate beta from a CSV dataset");
  add_common(fit, true);

  auto* simulate =
      app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(simulate, false);
  simulate->add_option("--scenario", sim.scenario,
                       "both_correct|r_correct_only|m_correct_only|both_wrong");
  simulate->add_option("--reps", sim.reps, "number of replicates");
  simulate->add_option("--n", sim.n, "sample size");
  simulate->add_option("--p", sim.p, "covariate dimension");
  simulate->add_option("--beta0", sim.beta0, "target exposure coefficient");
  simulate->add_option("--dgp", sim.dgp,
                       "cond_gaussian|logistic_linear|nonlinear");

  auto* validate =
      app.add_subcommand("validate", "schema-check data and config");
  add_common(validate, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(fit)) return cmd_fit(opts);
    if (app.got_subcommand(simulate)) return cmd_simulate(opts, sim);
    if (app.got_subcommand(validate)) return cmd_validate(opts);
  } catch (const drlogit::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kExitNumerical;
  }
  return kExitOk;
}
