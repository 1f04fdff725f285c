// margin-guard: decide how many example-based explanations can be released
// before agents near the decision boundary can game the model.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "margin_guard/pipeline.hpp"

namespace {

using margin_guard::RunConfig;

// Configuration file keys mirror the long flag names. The file is applied
// before parsing, so explicit flags override it.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::domain_error("config parse error: " + std::string(e.what()));
  }
  cfg.dataset_path = j.value("dataset", cfg.dataset_path);
  cfg.weights_path = j.value("weights", cfg.weights_path);
  cfg.fit_iters = j.value("fit_iters", cfg.fit_iters);
  cfg.fit_step = j.value("fit_step", cfg.fit_step);
  cfg.fit_l2 = j.value("fit_l2", cfg.fit_l2);
  cfg.fit_bias = j.value("fit_bias", cfg.fit_bias);
  cfg.expl_method = j.value("method", cfg.expl_method);
  cfg.expl_k = j.value("k", cfg.expl_k);
  if (j.contains("bandwidth")) cfg.mmd_bandwidth = j["bandwidth"].get<double>();
  if (j.contains("r")) cfg.r_values = j["r"].get<std::vector<double>>();
  if (j.contains("grid")) cfg.grid = j["grid"].get<std::vector<double>>();
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.thin = j.value("thin", cfg.thin);
  cfg.box_bound = j.value("box_bound", cfg.box_bound);
  cfg.repeats = j.value("repeats", cfg.repeats);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.metric = j.value("metric", cfg.metric);
  cfg.kappa = j.value("kappa", cfg.kappa);
  if (j.contains("targets")) {
    cfg.targets = j["targets"].get<std::vector<double>>();
  }
  cfg.n_targets = j.value("n_targets", cfg.n_targets);
  cfg.normalize = j.value("normalize", cfg.normalize);
  cfg.use_band = j.value("band", cfg.use_band);
  cfg.curve_path = j.value("curve", cfg.curve_path);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

void add_common_options(CLI::App* cmd, RunConfig& cfg,
                        std::optional<std::uint64_t>& seed,
                        std::string& config_sink) {
  // The config file was already applied in a pre-scan; this option only
  // keeps the flag recognized by the parser.
  cmd->add_option("--config", config_sink, "JSON config file (flags override)");
  cmd->add_option("--data", cfg.dataset_path, "dataset CSV");
  cmd->add_option("--weights", cfg.weights_path, "model weights JSON");
  cmd->add_option("--method", cfg.expl_method,
                  "explanation method: kmedoid | mmd | all");
  cmd->add_option("--k", cfg.expl_k, "number of prototypes");
  cmd->add_option("--n-samples", cfg.n_samples, "version-space samples");
  cmd->add_option("--burn-in", cfg.burn_in, "walk burn-in (0: 1000*d)");
  cmd->add_option("--thin", cfg.thin, "walk thinning (0: 10*d)");
  cmd->add_option("--box-bound", cfg.box_bound, "polytope box bound");
  cmd->add_option("--repeats", cfg.repeats, "sampling repetitions per point");
  cmd->add_option("--seed", seed, "RNG seed (mandatory when sampling)");
  cmd->add_option("--metric", cfg.metric,
                  "certainty metric: max | top5 | mean");
  cmd->add_option("--kappa", cfg.kappa, "risk threshold");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_flag("--normalize", cfg.normalize, "L2-normalize dataset rows");
  cmd->add_option("--fit-iters", cfg.fit_iters, "trainer iterations");
  cmd->add_option("--fit-step", cfg.fit_step, "trainer step size");
  cmd->add_option("--fit-l2", cfg.fit_l2, "trainer l2 penalty");
  cmd->add_flag("--fit-bias", cfg.fit_bias, "train an intercept");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"margin-guard: safe release of example-based explanations"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string config_sink;
  try {
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
      apply_config_file(config_path, cfg);
      seed = cfg.seed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  // analytic
  auto* analytic = app.add_subcommand(
      "analytic", "closed-form certainty and bound checks (spherical case)");
  int an_d = 2;
  std::optional<double> an_alpha, an_r, an_phi, an_psi;
  analytic->add_option("--d", an_d, "dimension")->required();
  analytic->add_option("--alpha", an_alpha, "margin cutoff in [0,1)");
  analytic->add_option("--r", an_r, "manipulation radius in (0,2]");
  analytic->add_option("--phi", an_phi, "cap half-angle");
  analytic->add_option("--psi", an_psi, "boundary thickness angle");

  // curve
  auto* curve = app.add_subcommand(
      "curve", "certainty-vs-omission curves for each metric and radius");
  add_common_options(curve, cfg, seed, config_sink);
  curve->add_option("--r", cfg.r_values, "manipulation radii");
  curve->add_option("--grid", cfg.grid, "omission percentiles");

  // search
  auto* search = app.add_subcommand(
      "search", "difference table and threshold search on a curve");
  add_common_options(search, cfg, seed, config_sink);
  search->add_option("--r", cfg.r_values, "manipulation radius (single)");
  search->add_option("--grid", cfg.grid, "omission percentiles");
  search->add_option("--curve", cfg.curve_path, "existing curve CSV");
  search->add_option("--targets", cfg.targets, "explicit target values");
  search->add_option("--n-targets", cfg.n_targets, "evenly spaced targets");

  // counterexample
  auto* counter = app.add_subcommand("counterexample",
                                     "worked negative-result constructions");
  std::string ce_name;
  counter
      ->add_option("--name", ce_name,
                   "threshold-1d | non-spherical | non-uniform-prior | "
                   "non-homogeneous")
      ->required();
  std::optional<double> ce_gamma, ce_psi, ce_alpha1, ce_alpha2, ce_xm, ce_xp,
      ce_x, ce_xprime;
  std::optional<long long> ce_n;
  std::optional<std::uint64_t> ce_seed;
  std::optional<int> ce_d;
  counter->add_option("--d", ce_d, "dimension");
  counter->add_option("--gamma", ce_gamma, "mixture gamma = arccos(alpha)");
  counter->add_option("--psi", ce_psi, "boundary thickness angle");
  counter->add_option("--alpha1", ce_alpha1, "larger cutoff");
  counter->add_option("--alpha2", ce_alpha2, "smaller cutoff");
  counter->add_option("--x-minus", ce_xm, "largest released negative point");
  counter->add_option("--x-plus", ce_xp, "smallest released positive point");
  counter->add_option("--x", ce_x, "true feature");
  counter->add_option("--x-prime", ce_xprime, "misreport target");
  counter->add_option("--n", ce_n, "Monte-Carlo draws");
  counter->add_option("--seed", ce_seed, "RNG seed");

  // audit
  auto* audit =
      app.add_subcommand("audit", "group composition of the boundary region");
  add_common_options(audit, cfg, seed, config_sink);
  audit->add_option("--r", cfg.r_values, "manipulation radius (single)");
  audit->add_flag("--band", cfg.use_band,
                  "use the spherical band characterization");

  // explain
  auto* explain = app.add_subcommand("explain", "prototype selection only");
  add_common_options(explain, cfg, seed, config_sink);
  std::optional<double> bw_flag;
  explain->add_option("--bandwidth", bw_flag, "MMD kernel bandwidth");

  // fit
  auto* fit = app.add_subcommand("fit", "train the linear model");
  add_common_options(fit, cfg, seed, config_sink);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.seed = seed;
  if (bw_flag) cfg.mmd_bandwidth = bw_flag;

  try {
    nlohmann::json out;
    if (analytic->parsed()) {
      out = margin_guard::run_analytic(an_d, an_alpha, an_r, an_phi, an_psi);
    } else if (curve->parsed()) {
      out = margin_guard::run_curve(cfg);
    } else if (search->parsed()) {
      out = margin_guard::run_search(cfg);
    } else if (counter->parsed()) {
      nlohmann::json params;
      if (ce_d) params["d"] = *ce_d;
      if (ce_gamma) params["gamma"] = *ce_gamma;
      if (ce_psi) params["psi"] = *ce_psi;
      if (ce_alpha1) params["alpha1"] = *ce_alpha1;
      if (ce_alpha2) params["alpha2"] = *ce_alpha2;
      if (ce_xm) params["x_minus"] = *ce_xm;
      if (ce_xp) params["x_plus"] = *ce_xp;
      if (ce_x) params["x"] = *ce_x;
      if (ce_xprime) params["x_prime"] = *ce_xprime;
      if (ce_n) params["n"] = *ce_n;
      if (ce_seed) params["seed"] = *ce_seed;
      out = margin_guard::run_counterexample(ce_name, params);
    } else if (audit->parsed()) {
      out = margin_guard::run_audit(cfg);
    } else if (explain->parsed()) {
      out = margin_guard::run_explain(cfg);
    } else if (fit->parsed()) {
      out = margin_guard::run_fit(cfg);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const margin_guard::InfeasiblePolytopeError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const margin_guard::SamplerError& e) {
    std::cerr << "sampler failure: " << e.what() << "\n";
    return 4;
  } catch (const margin_guard::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
