#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "margin_guard/counterexamples.hpp"
#include "margin_guard/explanations.hpp"
#include "margin_guard/io.hpp"
#include "margin_guard/sphere_analytics.hpp"
#include "margin_guard/threshold_search.hpp"

// End-to-end orchestration behind the CLI subcommands. Every command is a
// pure function of its RunConfig; all file writes happen at the end.

namespace margin_guard {

struct RunConfig {
  std::string dataset_path;
  std::string weights_path;  // empty: fit from the dataset labels
  // Trainer settings (used when weights_path is empty).
  int fit_iters = 500;
  double fit_step = 0.5;
  double fit_l2 = 1e-4;
  bool fit_bias = false;
  // Explanation selection.
  std::string expl_method = "kmedoid";  // kmedoid | mmd | all
  int expl_k = 50;
  std::optional<double> mmd_bandwidth;
  // Boundary and curve settings.
  std::vector<double> r_values = {0.1, 0.2, 0.3};
  std::vector<double> grid;  // empty: 0,5,...,75
  int n_samples = 2000;
  int burn_in = 0;
  int thin = 0;
  double box_bound = 1.0;
  int repeats = 8;
  std::optional<std::uint64_t> seed;
  std::string metric = "max";  // for search/audit-style single-metric use
  double kappa = 0.5;
  std::vector<double> targets;
  int n_targets = 10;
  bool normalize = false;
  bool use_band = false;  // audit: band characterization instead of pair set
  std::string curve_path;  // search: reuse an existing curve CSV
  std::string out_dir = ".";
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::domain_error(msg);
}

inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int l = 0; l <= 75; l += 5) g.push_back(l);
  return g;
}

inline Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    require(norm > 0.0, "normalize: zero row " + std::to_string(i));
    out.row(i) /= norm;
  }
  return out;
}

struct PreparedRun {
  Dataset dataset;
  LinearModel model;
  PrototypeSelection selection;
  ExplanationSet explanations;
};

inline PreparedRun prepare(const RunConfig& cfg) {
  require(!cfg.dataset_path.empty(), "missing dataset path");
  require(std::filesystem::exists(cfg.dataset_path),
          "dataset path does not exist: " + cfg.dataset_path);
  PreparedRun run;
  run.dataset = read_dataset_csv(cfg.dataset_path);
  if (cfg.normalize) run.dataset.points = normalize_rows(run.dataset.points);

  if (!cfg.weights_path.empty()) {
    require(std::filesystem::exists(cfg.weights_path),
            "weights path does not exist: " + cfg.weights_path);
    run.model = read_model_json(cfg.weights_path);
    require(run.model.dim() == run.dataset.points.cols(),
            "weights dimension does not match the dataset");
  } else {
    run.model = fit_linear(
        run.dataset.points, run.dataset.labels,
        {cfg.fit_iters, cfg.fit_step, cfg.fit_l2, cfg.fit_bias});
  }

  const int n = static_cast<int>(run.dataset.points.rows());
  if (cfg.expl_method == "all") {
    run.selection.indices.resize(n);
    for (int i = 0; i < n; ++i) run.selection.indices[i] = i;
    run.selection.objective = 0.0;
  } else if (cfg.expl_method == "kmedoid") {
    run.selection =
        k_medoid(run.dataset.points, std::min(cfg.expl_k, n),
                 cfg.seed.value_or(0));
  } else if (cfg.expl_method == "mmd") {
    run.selection = mmd_critic_prototypes(
        run.dataset.points, std::min(cfg.expl_k, n), cfg.mmd_bandwidth);
  } else {
    throw std::domain_error("unknown explanation method: " + cfg.expl_method);
  }

  Eigen::MatrixXd proto(run.selection.indices.size(),
                        run.dataset.points.cols());
  for (std::size_t i = 0; i < run.selection.indices.size(); ++i) {
    proto.row(i) = run.dataset.points.row(run.selection.indices[i]);
  }
  run.explanations = make_explanation_set(proto, run.model);
  return run;
}

inline std::string curve_file_name(const std::string& metric, double r) {
  return "curve_" + metric + "_r" + fmt_double(r) + ".csv";
}

inline CurveSettings curve_settings(const RunConfig& cfg, double r) {
  require(cfg.seed.has_value(), "seed is mandatory for sampling commands");
  CurveSettings s;
  s.grid = cfg.grid.empty() ? default_grid() : cfg.grid;
  s.repeats = cfg.repeats;
  s.seed = *cfg.seed;
  s.r = r;
  s.sampler = {cfg.n_samples, cfg.burn_in, cfg.thin, cfg.box_bound};
  return s;
}

}  // namespace detail

// `analytic`: closed-form certainty plus the two bound verdicts.
inline nlohmann::json run_analytic(int dim, std::optional<double> alpha,
                                   std::optional<double> r,
                                   std::optional<double> phi,
                                   std::optional<double> psi) {
  CapGeometry geom;
  if (alpha && r) {
    geom = CapGeometry::from_alpha_r(dim, *alpha, *r);
  } else if (phi && psi) {
    geom = CapGeometry::from_angles(dim, *phi, *psi);
  } else {
    throw std::domain_error("analytic: provide --alpha/--r or --phi/--psi");
  }
  const double pi = pi_closed_form(geom);
  const BoundVerdict large = check_large_alpha_bound(geom);
  const BoundVerdict refined = check_refined_alpha_bound(geom);
  nlohmann::json j;
  j["d"] = geom.dim;
  j["alpha"] = geom.alpha;
  j["phi"] = geom.phi;
  j["r"] = geom.r;
  j["psi"] = geom.psi;
  j["pi"] = pi;
  j["large_alpha_bound"] = {{"applicable", large.applicable},
                            {"bound", large.bound},
                            {"holds", large.holds}};
  j["refined_bound"] = {{"applicable", refined.applicable},
                        {"bound", refined.bound},
                        {"holds", refined.holds}};
  return j;
}

// `curve`: one CSV per (metric, r) plus a report JSON. Idempotent given the
// seed.
inline nlohmann::json run_curve(const RunConfig& cfg) {
  const detail::PreparedRun run = detail::prepare(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  nlohmann::json report;
  report["dataset"] = cfg.dataset_path;
  report["n_points"] = run.dataset.points.rows();
  report["n_explanations"] = run.explanations.size();
  report["expl_method"] = cfg.expl_method;
  report["seed"] = cfg.seed.value_or(0);
  report["files"] = nlohmann::json::array();
  for (double r : cfg.r_values) {
    const CurveBundle bundle = certainty_curves(
        run.dataset.points, run.model, run.explanations,
        detail::curve_settings(cfg, r));
    nlohmann::json entry;
    entry["r"] = r;
    entry["pair_count"] = bundle.pair_count;
    const BoundaryPairSet pairs =
        boundary_pairs(run.dataset.points, run.model, {r, true});
    const std::string pairs_name = "pairs_r" + fmt_double(r) + ".csv";
    write_pairs_csv((std::filesystem::path(cfg.out_dir) / pairs_name).string(),
                    pairs, run.dataset.points, run.model);
    entry["pairs"] = pairs_name;
    for (const CertaintyCurve* c :
         {&bundle.max_pi, &bundle.top5, &bundle.mean_pi}) {
      const std::string name = detail::curve_file_name(c->metric_name, r);
      write_curve_csv((std::filesystem::path(cfg.out_dir) / name).string(),
                      *c);
      entry["curves"].push_back(name);
    }
    report["files"].push_back(entry);
  }
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "report.json");
  out << report.dump(2) << "\n";
  return report;
}

// `search`: difference table against the risk target, from an existing curve
// CSV or a freshly generated one.
inline nlohmann::json run_search(const RunConfig& cfg) {
  CertaintyCurve curve;
  if (!cfg.curve_path.empty()) {
    detail::require(std::filesystem::exists(cfg.curve_path),
                    "curve path does not exist: " + cfg.curve_path);
    curve = read_curve_csv(cfg.curve_path);
  } else {
    detail::require(cfg.r_values.size() == 1,
                    "search without --curve needs exactly one r");
    const detail::PreparedRun run = detail::prepare(cfg);
    curve = certainty_curve(run.dataset.points, run.model, run.explanations,
                            detail::curve_settings(cfg, cfg.r_values[0]),
                            cfg.metric);
  }

  std::vector<DifferenceRow> rows;
  if (!cfg.targets.empty()) {
    for (double target : cfg.targets) {
      DifferenceRow row;
      row.target = target;
      row.binary = bisect_percentile(curve, target);
      row.optimal = linear_scan_optimal(curve, target);
      if (row.binary && row.optimal) {
        row.difference = *row.binary - *row.optimal;
      }
      rows.push_back(row);
    }
  } else {
    rows = difference_table(curve, cfg.n_targets);
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::string name =
      "difference_" + curve.metric_name + "_r" + fmt_double(curve.r) + ".csv";
  write_difference_csv((std::filesystem::path(cfg.out_dir) / name).string(),
                       rows);

  const auto binary = bisect_percentile(curve, cfg.kappa);
  const auto optimal = linear_scan_optimal(curve, cfg.kappa);
  nlohmann::json j;
  j["kappa"] = cfg.kappa;
  j["binary"] = binary ? nlohmann::json(*binary) : nlohmann::json();
  j["optimal"] = optimal ? nlohmann::json(*optimal) : nlohmann::json();
  j["table"] = name;
  return j;
}

// `audit`: group composition of the boundary region.
inline nlohmann::json run_audit(const RunConfig& cfg) {
  detail::require(cfg.r_values.size() == 1, "audit needs exactly one r");
  const double r = cfg.r_values[0];
  RunConfig prep_cfg = cfg;
  prep_cfg.expl_method = "all";  // audit never selects prototypes
  const detail::PreparedRun run = detail::prepare(prep_cfg);
  detail::require(run.dataset.has_groups(),
                  "audit requires a `group` column in the dataset");

  std::vector<bool> flags(run.dataset.points.rows(), false);
  if (cfg.use_band) {
    Eigen::VectorXd w_unit = run.model.w;
    detail::require(w_unit.norm() > 0.0, "audit: zero weight vector");
    w_unit /= w_unit.norm();
    flags = band_membership(run.dataset.points, w_unit, r);
  } else {
    const BoundaryPairSet pairs =
        boundary_pairs(run.dataset.points, run.model, {r, true});
    for (const auto& [i, j] : pairs.pairs) {
      flags[i] = true;
      flags[j] = true;
    }
  }
  const auto composition = group_composition(flags, run.dataset.groups);
  nlohmann::json j;
  j["r"] = r;
  j["n_flagged"] =
      static_cast<long long>(std::count(flags.begin(), flags.end(), true));
  if (!composition) {
    j["empty_selection"] = true;
    j["composition"] = nlohmann::json::object();
  } else {
    j["empty_selection"] = false;
    j["composition"] = *composition;
  }
  return j;
}

// `explain`: prototype selection only; writes the explanation CSV.
inline nlohmann::json run_explain(const RunConfig& cfg) {
  const detail::PreparedRun run = detail::prepare(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string name = "explanations.csv";
  write_explanations_csv(
      (std::filesystem::path(cfg.out_dir) / name).string(), run.explanations);
  nlohmann::json j;
  j["method"] = cfg.expl_method;
  j["k"] = run.explanations.size();
  j["objective"] = run.selection.objective;
  j["file"] = name;
  return j;
}

// `fit`: trains the linear model and writes the weights JSON.
inline nlohmann::json run_fit(const RunConfig& cfg) {
  detail::require(!cfg.dataset_path.empty(), "missing dataset path");
  detail::require(std::filesystem::exists(cfg.dataset_path),
                  "dataset path does not exist: " + cfg.dataset_path);
  Dataset ds = read_dataset_csv(cfg.dataset_path);
  if (cfg.normalize) ds.points = detail::normalize_rows(ds.points);
  const LinearModel model =
      fit_linear(ds.points, ds.labels,
                 {cfg.fit_iters, cfg.fit_step, cfg.fit_l2, cfg.fit_bias});
  std::filesystem::create_directories(cfg.out_dir);
  const std::string name = "weights.json";
  write_model_json((std::filesystem::path(cfg.out_dir) / name).string(),
                   model);
  long long correct = 0;
  for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
    correct += model.predict(ds.points.row(i).transpose()) == ds.labels[i];
  }
  nlohmann::json j;
  j["file"] = name;
  j["train_accuracy"] =
      static_cast<double>(correct) / static_cast<double>(ds.points.rows());
  return j;
}

// `counterexample`: JSON verdict per named scenario.
inline nlohmann::json run_counterexample(const std::string& name,
                                         const nlohmann::json& raw_params) {
  const nlohmann::json params =
      raw_params.is_object() ? raw_params : nlohmann::json::object();
  nlohmann::json j;
  j["scenario"] = name;
  if (name == "threshold-1d") {
    const double x_minus = params.value("x_minus", -0.2);
    const double x_plus = params.value("x_plus", 0.3);
    const double x = params.value("x", 0.0);
    const double x_prime = params.value("x_prime", 0.25);
    j["params"] = {{"x_minus", x_minus},
                   {"x_plus", x_plus},
                   {"x", x},
                   {"x_prime", x_prime}};
    j["pi"] = threshold_1d_pi(x_minus, x_plus, x, x_prime);
  } else if (name == "non-spherical") {
    const auto s = NonSphericalScenario::reference();
    const double p1 = non_spherical_pi(s, CutoffChoice::alpha1);
    const double p2 = non_spherical_pi(s, CutoffChoice::alpha2);
    j["params"] = {{"gamma", s.gamma}, {"mu", s.mu},       {"theta", s.theta},
                   {"nu", s.nu},       {"r", s.r},         {"alpha1", s.alpha1},
                   {"alpha2", s.alpha2}};
    j["pi_alpha1"] = p1;
    j["pi_alpha2"] = p2;
    j["nonmonotone"] = p2 < p1;
  } else if (name == "non-uniform-prior") {
    NonUniformPriorConfig cfg;
    cfg.dim = params.value("d", 3);
    cfg.alpha1 = params.value("alpha1", 0.8);
    cfg.alpha2 = params.value("alpha2", 0.5);
    cfg.psi = params.value("psi", 0.3);
    cfg.n = params.value("n", 100000LL);
    if (!params.contains("seed")) {
      throw std::domain_error("non-uniform-prior requires a seed");
    }
    cfg.seed = params["seed"].get<std::uint64_t>();
    j["params"] = {{"d", cfg.dim},   {"alpha1", cfg.alpha1},
                   {"alpha2", cfg.alpha2}, {"psi", cfg.psi},
                   {"n", cfg.n},     {"seed", cfg.seed}};
    const auto est = non_uniform_prior_estimate(cfg);
    j["pi_alpha1"] = est.pi1_hat;
    j["pi_alpha2"] = est.pi2_hat;
    j["se_alpha1"] = est.se1;
    j["se_alpha2"] = est.se2;
    j["pi1_gt_pi2"] = est.pi1_hat > est.pi2_hat;
    j["separation_se"] =
        (est.pi1_hat - est.pi2_hat) / std::max(est.se1 + est.se2, 1e-15);
  } else if (name == "non-homogeneous") {
    MixtureClassParams p;
    p.gamma = params.value("gamma", M_PI / 4.0);
    p.psi = params.value("psi", M_PI / 4.0);
    j["params"] = {{"gamma", p.gamma}, {"psi", p.psi}};
    const double pi = mixture_class_pi(p);
    j["pi"] = pi;
    j["ge_one_third"] = pi >= 1.0 / 3.0;
  } else {
    throw std::domain_error("unknown counterexample scenario: " + name);
  }
  return j;
}

}  // namespace margin_guard
