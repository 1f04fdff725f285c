#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "margin_guard/boundary.hpp"
#include "margin_guard/certainty.hpp"
#include "margin_guard/explanations.hpp"
#include "margin_guard/sphere_analytics.hpp"
#include "margin_guard/version_space.hpp"

// Certainty-vs-omission curves and the search for the smallest omission
// meeting a risk target kappa: index bisection (assumes a nonincreasing
// curve) against the left-to-right scan (ground truth).

namespace margin_guard {

// One certainty metric sampled over an ascending percentile grid. Grid points
// whose evaluation failed (infeasible polytope, empty pair set) hold NaN.
struct CertaintyCurve {
  std::vector<double> grid;     // percentiles l, strictly ascending
  std::vector<double> values;   // metric value, mean over repeats
  std::vector<double> stddevs;  // per-point deviation over repeats
  int repeats = 1;
  std::string metric_name;  // "max" | "top5" | "mean"
  double r = 0.0;
};

struct SearchConfig {
  double kappa = 0.5;
  std::vector<double> targets;  // optional explicit difference-table targets
};

struct SamplerSettings {
  int n_samples = 2000;
  int burn_in = 0;  // 0: defaults to 1000 * d
  int thin = 0;     // 0: defaults to 10 * d
  double box_bound = 1.0;
};

struct CurveSettings {
  std::vector<double> grid;
  int repeats = 8;
  std::uint64_t seed = 0;
  double r = 0.1;
  bool positive_flip_only = true;
  SamplerSettings sampler;
};

struct CurveBundle {
  CertaintyCurve max_pi;
  CertaintyCurve top5;
  CertaintyCurve mean_pi;
  std::size_t pair_count = 0;
};

// Runs the full measurement at every grid percentile: filter explanations,
// build the consistency polytope, sample it, and reduce the three metrics.
// Each (grid point, repeat) owns the seed `seed + index * repeats + repeat`,
// so curves for different radii share identical model samples.
inline CurveBundle certainty_curves(const Eigen::MatrixXd& points,
                                    const LinearModel& model,
                                    const ExplanationSet& full_expl,
                                    const CurveSettings& cfg) {
  if (cfg.grid.empty()) throw std::domain_error("certainty_curves: empty grid");
  for (std::size_t i = 0; i + 1 < cfg.grid.size(); ++i) {
    if (!(cfg.grid[i] < cfg.grid[i + 1])) {
      throw std::domain_error("certainty_curves: grid must be ascending");
    }
  }
  if (cfg.repeats < 1) throw std::domain_error("certainty_curves: repeats < 1");

  const int dim = static_cast<int>(points.cols());
  const int burn_in =
      cfg.sampler.burn_in > 0 ? cfg.sampler.burn_in : 1000 * dim;
  const int thin = cfg.sampler.thin > 0 ? cfg.sampler.thin : 10 * dim;

  const BoundaryPairSet pairs =
      boundary_pairs(points, model, {cfg.r, cfg.positive_flip_only});

  CurveBundle bundle;
  bundle.pair_count = pairs.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto init_curve = [&](CertaintyCurve& c, const char* name) {
    c.grid = cfg.grid;
    c.values.assign(cfg.grid.size(), nan);
    c.stddevs.assign(cfg.grid.size(), nan);
    c.repeats = cfg.repeats;
    c.metric_name = name;
    c.r = cfg.r;
  };
  init_curve(bundle.max_pi, "max");
  init_curve(bundle.top5, "top5");
  init_curve(bundle.mean_pi, "mean");
  if (pairs.empty()) {
    std::cerr << "certainty_curves: no boundary pairs at r=" << cfg.r
              << ", curve is all missing\n";
    return bundle;
  }

  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    std::vector<double> vmax, vtop, vmean;
    try {
      const ExplanationSet filtered =
          margin_distance_filter(full_expl, {cfg.grid[gi], true});
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        const std::uint64_t
            rep_seed = cfg.seed + static_cast<std::uint64_t>(gi) *
                                      static_cast<std::uint64_t>(cfg.repeats) +
                       static_cast<std::uint64_t>(rep);
        std::vector<Eigen::VectorXd> ws;
        if (filtered.size() == 0) {
          // Nothing released: the posterior is the prior over the box.
          ConsistencyPolytope box;
          box.box_bound = cfg.sampler.box_bound;
          box.dim = dim;
          box.interior = Eigen::VectorXd::Zero(dim);
          ws = hit_and_run_sample(box, cfg.sampler.n_samples, burn_in, thin,
                                  rep_seed);
        } else {
          const ConsistencyPolytope poly =
              polytope_from_explanations(filtered, cfg.sampler.box_bound);
          ws = hit_and_run_sample(poly, cfg.sampler.n_samples, burn_in, thin,
                                  rep_seed);
        }
        std::vector<LinearModel> samples;
        samples.reserve(ws.size());
        for (auto& w : ws) samples.push_back({std::move(w), 0.0});
        const auto rep_metrics = certainty_metrics(samples, points, pairs);
        vmax.push_back(rep_metrics->max_pi);
        vtop.push_back(rep_metrics->top5_mean);
        vmean.push_back(rep_metrics->mean_pi);
      }
    } catch (const InfeasiblePolytopeError& e) {
      std::cerr << "certainty_curves: grid point " << cfg.grid[gi]
                << " skipped: " << e.what() << "\n";
      continue;
    }
    auto reduce = [&](CertaintyCurve& c, const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size());
      c.values[gi] = mean;
      c.stddevs[gi] = std::sqrt(var);
    };
    reduce(bundle.max_pi, vmax);
    reduce(bundle.top5, vtop);
    reduce(bundle.mean_pi, vmean);
  }
  return bundle;
}

inline CertaintyCurve certainty_curve(const Eigen::MatrixXd& points,
                                      const LinearModel& model,
                                      const ExplanationSet& full_expl,
                                      const CurveSettings& cfg,
                                      const std::string& metric) {
  const CurveBundle bundle = certainty_curves(points, model, full_expl, cfg);
  if (metric == "max") return bundle.max_pi;
  if (metric == "top5") return bundle.top5;
  if (metric == "mean") return bundle.mean_pi;
  throw std::domain_error("certainty_curve: unknown metric " + metric);
}

namespace detail {
// Indices of the finite curve values, warning once when points are missing.
inline std::vector<std::size_t> usable_indices(const CertaintyCurve& c,
                                               const char* who) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (std::isfinite(c.values[i])) idx.push_back(i);
  }
  if (idx.size() != c.values.size()) {
    std::cerr << who << ": skipping " << c.values.size() - idx.size()
              << " missing grid points\n";
  }
  return idx;
}
}  // namespace detail

// Leftmost index of the "value <= kappa" suffix under the nonincreasing
// assumption; well-defined (by this exact trace) on any curve.
inline std::optional<double> bisect_percentile(const CertaintyCurve& curve,
                                               double kappa) {
  const auto idx = detail::usable_indices(curve, "bisect_percentile");
  if (idx.empty()) return std::nullopt;
  std::size_t lo = 0, hi = idx.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (curve.values[idx[mid]] <= kappa) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (curve.values[idx[lo]] <= kappa) return curve.grid[idx[lo]];
  return std::nullopt;
}

// Smallest grid percentile whose value meets the target; the ground truth.
inline std::optional<double> linear_scan_optimal(const CertaintyCurve& curve,
                                                 double kappa) {
  const auto idx = detail::usable_indices(curve, "linear_scan_optimal");
  for (std::size_t i : idx) {
    if (curve.values[i] <= kappa) return curve.grid[i];
  }
  return std::nullopt;
}

struct DifferenceRow {
  double target = 0.0;
  std::optional<double> binary;
  std::optional<double> optimal;
  std::optional<double> difference;  // binary - optimal when both achieved
};

// One row per target, targets evenly spaced over the attained value range.
inline std::vector<DifferenceRow> difference_table(const CertaintyCurve& curve,
                                                   int n_targets) {
  if (n_targets < 1) throw std::domain_error("difference_table: n_targets < 1");
  const auto idx = detail::usable_indices(curve, "difference_table");
  if (idx.empty()) return {};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i : idx) {
    lo = std::min(lo, curve.values[i]);
    hi = std::max(hi, curve.values[i]);
  }
  std::vector<double> targets;
  if (n_targets == 1) {
    targets.push_back(0.5 * (lo + hi));
  } else {
    for (int t = 0; t < n_targets; ++t) {
      targets.push_back(lo + (hi - lo) * t / (n_targets - 1));
    }
  }
  std::vector<DifferenceRow> rows;
  for (double target : targets) {
    DifferenceRow row;
    row.target = target;
    row.binary = bisect_percentile(curve, target);
    row.optimal = linear_scan_optimal(curve, target);
    if (row.binary && row.optimal) row.difference = *row.binary - *row.optimal;
    rows.push_back(row);
  }
  return rows;
}

// Smallest alpha (within tol) with closed-form certainty <= kappa, by real
// bisection on [sin(psi/2), 1). Certainty is 1 at the left endpoint and
// decreasing, so the bracket is valid; nullopt when even alpha -> 1 stays
// above kappa.
inline std::optional<double> find_alpha_analytic(int dim, double psi,
                                                 double kappa, double tol) {
  if (dim < 2) throw std::domain_error("find_alpha_analytic: dim must be >= 2");
  if (!(psi > 0.0 && psi <= M_PI)) {
    throw std::domain_error("find_alpha_analytic: psi must lie in (0, pi]");
  }
  if (!(tol > 0.0)) throw std::domain_error("find_alpha_analytic: tol <= 0");
  if (!(kappa > 0.0)) throw std::domain_error("find_alpha_analytic: kappa <= 0");
  const double alpha_floor = std::sin(0.5 * psi);
  if (kappa >= 1.0) return alpha_floor;  // certainty never exceeds 1

  const auto pi_at = [dim, psi](double alpha) {
    return pi_closed_form(CapGeometry::from_angles(dim, std::asin(alpha), psi));
  };
  double lo = alpha_floor;
  double hi = 1.0 - 1e-12;
  if (pi_at(hi) > kappa) return std::nullopt;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pi_at(mid) <= kappa) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace margin_guard
