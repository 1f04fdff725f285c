#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "margin_guard/errors.hpp"
#include "margin_guard/linear_model.hpp"
#include "margin_guard/version_space.hpp"

// Explanation production: prototype selection (PAM k-medoid, MMD-critic),
// margin scores, per-class percentile margin-distancing, and a minimal
// logistic trainer so the pipeline needs no external framework.

namespace margin_guard {

struct FitOptions {
  int iters = 500;
  double step = 0.5;
  double l2 = 1e-4;
  bool fit_bias = false;  // homogeneous by default
};

namespace detail {
inline double log1pexp(double t) {
  // log(1 + exp(t)) without overflow.
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}
}  // namespace detail

// Full-batch gradient descent on l2-regularized logistic loss, zero init.
inline LinearModel fit_linear(const Eigen::MatrixXd& points,
                              const Eigen::VectorXi& labels,
                              const FitOptions& opt = {}) {
  const Eigen::Index m = points.rows();
  if (m == 0 || labels.size() != m) {
    throw std::domain_error("fit_linear: empty data or label length mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (labels[i] == +1) has_pos = true;
    else if (labels[i] == -1) has_neg = true;
    else throw std::domain_error("fit_linear: labels must be -1 or +1");
  }
  if (!has_pos || !has_neg) {
    throw std::domain_error("fit_linear: need at least one point per label");
  }
  const Eigen::VectorXd y = labels.cast<double>();
  LinearModel model;
  model.w = Eigen::VectorXd::Zero(points.cols());
  model.b = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int it = 0; it < opt.iters; ++it) {
    const Eigen::VectorXd f = (points * model.w).array() + model.b;
    const Eigen::VectorXd yf = y.array() * f.array();
    double loss = 0.5 * opt.l2 * model.w.squaredNorm();
    for (Eigen::Index i = 0; i < m; ++i) loss += inv_m * detail::log1pexp(-yf[i]);
    if (!std::isfinite(loss)) {
      throw DivergenceError("fit_linear: non-finite loss");
    }
    // sigma(-y f) = 1 / (1 + exp(y f))
    const Eigen::VectorXd s =
        (1.0 / (1.0 + yf.array().exp())).matrix();
    const Eigen::VectorXd gw =
        -inv_m * (points.transpose() * (y.array() * s.array()).matrix()) +
        opt.l2 * model.w;
    model.w -= opt.step * gw;
    if (opt.fit_bias) {
      const double gb = -inv_m * (y.array() * s.array()).sum();
      model.b -= opt.step * gb;
    }
  }
  return model;
}

// Signed margin scores f(x) = w.x + b; callers take |.| for distancing.
inline Eigen::VectorXd margin_scores(const LinearModel& model,
                                     const Eigen::MatrixXd& points) {
  if (points.cols() != model.dim()) {
    throw std::domain_error("margin_scores: dimension mismatch");
  }
  return (points * model.w).array() + model.b;
}

struct PrototypeSelection {
  std::vector<int> indices;  // ascending
  double objective = 0.0;    // clustering cost or final MMD^2
};

namespace detail {

// One PAM run: SWAP passes (best single improvement per pass) from the given
// starting medoids until no swap helps.
inline double pam_swap(const Eigen::MatrixXd& dist, std::vector<int>& medoids,
                       int max_swap_passes) {
  const int n = static_cast<int>(dist.rows());
  std::vector<bool> is_medoid(n, false);
  for (int m : medoids) is_medoid[m] = true;

  std::vector<double> d1(n), d2(n);
  std::vector<int> who(n);
  auto recompute = [&]() {
    for (int i = 0; i < n; ++i) {
      double a = std::numeric_limits<double>::infinity();
      double b = a;
      int w = -1;
      for (int mi : medoids) {
        const double d = dist(i, mi);
        if (d < a) {
          b = a;
          a = d;
          w = mi;
        } else if (d < b) {
          b = d;
        }
      }
      d1[i] = a;
      d2[i] = b;
      who[i] = w;
    }
  };
  recompute();
  for (int pass = 0; pass < max_swap_passes; ++pass) {
    double best_delta = -1e-12;
    int best_out = -1, best_in = -1;
    for (int out : medoids) {
      for (int in = 0; in < n; ++in) {
        if (is_medoid[in]) continue;
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
          if (who[i] == out) {
            delta += std::min(d2[i], dist(i, in)) - d1[i];
          } else {
            delta += std::min(dist(i, in) - d1[i], 0.0);
          }
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_out = out;
          best_in = in;
        }
      }
    }
    if (best_out < 0) break;
    is_medoid[best_out] = false;
    is_medoid[best_in] = true;
    *std::find(medoids.begin(), medoids.end(), best_out) = best_in;
    recompute();
  }
  return std::accumulate(d1.begin(), d1.end(), 0.0);
}

// Greedy BUILD: the 1-medoid minimizer, then the point with the largest
// cost reduction. Ties go to the lower index.
inline std::vector<int> pam_build(const Eigen::MatrixXd& dist, int k) {
  const int n = static_cast<int>(dist.rows());
  std::vector<bool> is_medoid(n, false);
  std::vector<int> medoids;
  medoids.reserve(k);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  int first = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n; ++c) {
    const double cost = dist.col(c).sum();
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      first = c;
    }
  }
  medoids.push_back(first);
  is_medoid[first] = true;
  for (int i = 0; i < n; ++i) nearest[i] = dist(i, first);
  while (static_cast<int>(medoids.size()) < k) {
    int best = -1;
    double best_gain = -1.0;
    for (int c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double gain = 0.0;
      for (int i = 0; i < n; ++i) {
        gain += std::max(nearest[i] - dist(i, c), 0.0);
      }
      if (gain > best_gain + 1e-15) {
        best_gain = gain;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (int i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, best));
  }
  return medoids;
}

// Farthest-first traversal from a fixed anchor.
inline std::vector<int> farthest_first(const Eigen::MatrixXd& dist, int k,
                                       int anchor) {
  const int n = static_cast<int>(dist.rows());
  std::vector<int> medoids = {anchor};
  std::vector<double> nearest(n);
  for (int i = 0; i < n; ++i) nearest[i] = dist(i, anchor);
  while (static_cast<int>(medoids.size()) < k) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (nearest[i] > nearest[best] + 1e-15) best = i;
    }
    medoids.push_back(best);
    for (int i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, best));
  }
  return medoids;
}

}  // namespace detail

// PAM k-medoid: greedy BUILD then best-improvement SWAP passes. SWAP alone
// can land in a local optimum even at tiny sizes, so small instances also
// refine a handful of deterministic farthest-first starts and keep the best
// run. Everything is deterministic; the seed is kept for future variants.
inline PrototypeSelection k_medoid(const Eigen::MatrixXd& points, int k,
                                   std::uint64_t /*seed*/ = 0,
                                   int max_swap_passes = 200) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw std::domain_error("k_medoid: need 1 <= k <= n");

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  std::vector<std::vector<int>> starts;
  starts.push_back(detail::pam_build(dist, k));
  if (n <= 200 && k < n) {
    const int extra = std::min(6, n);
    for (int s = 0; s < extra; ++s) {
      starts.push_back(detail::farthest_first(dist, k, s * n / extra));
    }
  }

  std::vector<int> best_medoids;
  double best_cost = std::numeric_limits<double>::infinity();
  for (auto& medoids : starts) {
    const double cost = detail::pam_swap(dist, medoids, max_swap_passes);
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best_medoids = medoids;
    }
  }

  PrototypeSelection sel;
  sel.indices = best_medoids;
  std::sort(sel.indices.begin(), sel.indices.end());
  sel.objective = best_cost;
  return sel;
}

// Greedy MMD-critic prototypes under an RBF kernel. `bandwidth` empty means
// the median pairwise distance (1.0 when all points coincide); an explicit
// non-positive bandwidth is rejected. Objective is the MMD^2 between the
// data and the selected set.
inline PrototypeSelection mmd_critic_prototypes(
    const Eigen::MatrixXd& points, int k,
    std::optional<double> bandwidth = std::nullopt) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) {
    throw std::domain_error("mmd_critic_prototypes: need 1 <= k <= n");
  }
  double h;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) {
      throw std::domain_error("mmd_critic_prototypes: bandwidth must be > 0");
    }
    h = *bandwidth;
  } else {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        dists.push_back((points.row(i) - points.row(j)).norm());
      }
    }
    if (dists.empty()) {
      h = 1.0;
    } else {
      std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                       dists.end());
      h = dists[dists.size() / 2];
      if (h <= 0.0) h = 1.0;
    }
  }

  Eigen::MatrixXd kernel(n, n);
  const double inv_2h2 = 1.0 / (2.0 * h * h);
  for (int i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      const double v = std::exp(-d2 * inv_2h2);
      kernel(i, j) = v;
      kernel(j, i) = v;
    }
  }
  const Eigen::VectorXd row_mean = kernel.rowwise().mean();
  const double data_term = row_mean.mean();  // (1/n^2) sum_ij k(x_i, x_j)

  std::vector<bool> chosen(n, false);
  std::vector<int> selected;
  double cross_sum = 0.0;  // sum over selected of row_mean
  double self_sum = 0.0;   // sum over selected pairs of kernel
  double objective = 0.0;
  for (int step = 0; step < k; ++step) {
    const double m = static_cast<double>(step + 1);
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n; ++c) {
      if (chosen[c]) continue;
      double self_c = self_sum + kernel(c, c);
      for (int s : selected) self_c += 2.0 * kernel(s, c);
      const double mmd2 = data_term - 2.0 * (cross_sum + row_mean[c]) / m +
                          self_c / (m * m);
      if (mmd2 < best_val - 1e-15) {
        best_val = mmd2;
        best = c;
      }
    }
    for (int s : selected) self_sum += 2.0 * kernel(s, best);
    self_sum += kernel(best, best);
    cross_sum += row_mean[best];
    chosen[best] = true;
    selected.push_back(best);
    objective = best_val;
  }

  PrototypeSelection sel;
  sel.indices = selected;
  std::sort(sel.indices.begin(), sel.indices.end());
  sel.objective = objective;
  return sel;
}

struct DistancingConfig {
  double percentile = 0.0;  // l in [0, 100]
  bool per_class = true;
};

// Removes the floor(l m_c / 100) explanations closest to the margin within
// each label class (by |margin|, ties by original index). Survivors keep
// their original relative order.
inline ExplanationSet margin_distance_filter(const ExplanationSet& expl,
                                             const DistancingConfig& cfg) {
  if (!(cfg.percentile >= 0.0 && cfg.percentile <= 100.0)) {
    throw std::domain_error(
        "margin_distance_filter: percentile must lie in [0, 100]");
  }
  const Eigen::Index m = expl.size();
  std::vector<bool> removed(m, false);

  auto drop_closest = [&](const std::vector<int>& members) {
    const auto count = static_cast<std::size_t>(std::floor(
        cfg.percentile * static_cast<double>(members.size()) / 100.0));
    std::vector<int> order = members;
    std::sort(order.begin(), order.end(), [&expl](int a, int b) {
      const double ma = std::fabs(expl.margins[a]);
      const double mb = std::fabs(expl.margins[b]);
      if (ma != mb) return ma < mb;
      return a < b;
    });
    for (std::size_t i = 0; i < count && i < order.size(); ++i) {
      removed[order[i]] = true;
    }
  };

  if (cfg.per_class) {
    std::vector<int> pos, neg;
    for (Eigen::Index i = 0; i < m; ++i) {
      (expl.labels[i] == +1 ? pos : neg).push_back(static_cast<int>(i));
    }
    drop_closest(pos);
    drop_closest(neg);
  } else {
    std::vector<int> all(m);
    std::iota(all.begin(), all.end(), 0);
    drop_closest(all);
  }

  std::vector<int> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!removed[i]) keep.push_back(static_cast<int>(i));
  }
  ExplanationSet out;
  out.points.resize(keep.size(), expl.points.cols());
  out.labels.resize(keep.size());
  out.margins.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.points.row(i) = expl.points.row(keep[i]);
    out.labels[i] = expl.labels[keep[i]];
    out.margins[i] = expl.margins[keep[i]];
  }
  return out;
}

}  // namespace margin_guard
