#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "margin_guard/linear_model.hpp"

// Boundary points and pairs of a linear model over a finite feature set.

namespace margin_guard {

struct BoundaryConfig {
  double r = 0.1;                  // manipulation radius, strict ||x - x'|| < r
  bool positive_flip_only = true;  // only (negative, positive) orderings
};

// Ordered index pairs (i, j): the model labels x_i and x_j oppositely and
// ||x_i - x_j|| < r. In positive-flip mode i is the negative point.
struct BoundaryPairSet {
  std::vector<std::pair<int, int>> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// All boundary pairs at radius r. Candidates are first pruned to points with
// |f(x)| <= r ||w||: any pair member is within r of the separating hyperplane,
// so the filter never drops a true pair. The quadratic scan runs on the
// pruned set only.
inline BoundaryPairSet boundary_pairs(const Eigen::MatrixXd& points,
                                      const LinearModel& model,
                                      const BoundaryConfig& cfg) {
  if (points.cols() != model.dim()) {
    throw std::domain_error("boundary_pairs: dimension mismatch");
  }
  if (!(cfg.r > 0.0)) throw std::domain_error("boundary_pairs: r must be > 0");
  const Eigen::VectorXd f = (points * model.w).array() + model.b;
  const double w_norm = model.w.norm();

  std::vector<int> neg, pos;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (std::fabs(f[i]) > cfg.r * w_norm) continue;
    (f[i] >= 0.0 ? pos : neg).push_back(static_cast<int>(i));
  }

  BoundaryPairSet out;
  const double r2 = cfg.r * cfg.r;
  for (int i : neg) {
    for (int j : pos) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      if (d2 < r2) {
        out.pairs.emplace_back(i, j);
        if (!cfg.positive_flip_only) out.pairs.emplace_back(j, i);
      }
    }
  }
  return out;
}

// Band characterization of boundary points on the unit sphere:
// x is a boundary point iff <w*, x> lies in [-sin(psi), sin(psi)) with
// psi = 2 arcsin(r/2).
inline std::vector<bool> band_membership(const Eigen::MatrixXd& points,
                                         const Eigen::VectorXd& w_star,
                                         double r) {
  if (points.cols() != w_star.size()) {
    throw std::domain_error("band_membership: dimension mismatch");
  }
  if (!(r > 0.0 && r <= 2.0)) {
    throw std::domain_error("band_membership: r must lie in (0, 2]");
  }
  if (std::fabs(w_star.norm() - 1.0) > 1e-6) {
    throw std::domain_error("band_membership: w_star must be a unit vector");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (std::fabs(points.row(i).norm() - 1.0) > 1e-6) {
      throw std::domain_error(
          "band_membership: point " + std::to_string(i) + " is not unit norm");
    }
  }
  const double sin_psi = std::sin(2.0 * std::asin(0.5 * r));
  std::vector<bool> flags(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double t = w_star.dot(points.row(i));
    flags[i] = t >= -sin_psi && t < sin_psi;
  }
  return flags;
}

// Per-group share of the flagged points. Empty selection is a distinguished
// result (nullopt), not an error.
inline std::optional<std::map<std::string, double>> group_composition(
    const std::vector<bool>& member_flags,
    const std::vector<std::string>& groups) {
  if (member_flags.size() != groups.size()) {
    throw std::domain_error("group_composition: length mismatch");
  }
  std::map<std::string, double> counts;
  double total = 0.0;
  for (std::size_t i = 0; i < member_flags.size(); ++i) {
    if (!member_flags[i]) continue;
    counts[groups[i]] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) return std::nullopt;
  for (auto& [group, count] : counts) count /= total;
  return counts;
}

}  // namespace margin_guard
