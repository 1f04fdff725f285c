#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "margin_guard/errors.hpp"
#include "margin_guard/linear_model.hpp"
#include "margin_guard/random.hpp"

// The set of linear classifiers consistent with released explanations:
// exact spherical-cap form for homogeneous models over the unit sphere,
// polytope form plus hit-and-run sampling otherwise.

namespace margin_guard {

// Released explanations: points with the generating model's labels and
// signed margin scores.
struct ExplanationSet {
  Eigen::MatrixXd points;   // one row per explanation
  Eigen::VectorXi labels;   // in {-1, +1}
  Eigen::VectorXd margins;  // signed f*(x) of the generating model

  Eigen::Index size() const { return points.rows(); }
};

inline ExplanationSet make_explanation_set(const Eigen::MatrixXd& points,
                                           const LinearModel& model) {
  if (points.cols() != model.dim()) {
    throw std::domain_error("make_explanation_set: dimension mismatch");
  }
  ExplanationSet e;
  e.points = points;
  e.margins = (points * model.w).array() + model.b;
  e.labels.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    e.labels[i] = e.margins[i] >= 0.0 ? +1 : -1;
  }
  return e;
}

// true iff the model reproduces every released label (sign(0) = +1).
inline bool consistency_check(const LinearModel& model,
                              const ExplanationSet& expl) {
  if (expl.size() == 0) return true;
  if (expl.points.cols() != model.dim()) {
    throw std::domain_error("consistency_check: dimension mismatch");
  }
  const Eigen::VectorXd f = (expl.points * model.w).array() + model.b;
  for (Eigen::Index i = 0; i < expl.size(); ++i) {
    if ((f[i] >= 0.0 ? +1 : -1) != expl.labels[i]) return false;
  }
  return true;
}

// Version space of a homogeneous model under margin cutoff alpha:
// {w : ||w|| = 1, w . center >= cos(half_angle)} with half_angle = arcsin(alpha).
struct SphericalCap {
  Eigen::VectorXd center;
  double half_angle = 0.0;
};

inline SphericalCap cap_from_alpha(const Eigen::VectorXd& w_star,
                                   double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("cap_from_alpha: alpha must lie in [0, 1)");
  }
  if (std::fabs(w_star.norm() - 1.0) > 1e-8) {
    throw std::domain_error("cap_from_alpha: w_star must be a unit vector");
  }
  return SphericalCap{w_star, std::asin(alpha)};
}

inline bool cap_contains(const SphericalCap& cap, const Eigen::VectorXd& w) {
  return cap.center.dot(w) >= std::cos(cap.half_angle) - 1e-12;
}

namespace detail {

// Inverse CDF table for the cap marginal t = w . center, whose density on
// [cos(phi), 1] is proportional to (1 - t^2)^{(d-3)/2}. Exponents are taken
// in log space so large d does not underflow.
class CapMarginalSampler {
 public:
  CapMarginalSampler(int dim, double t_lo, double t_hi)
      : dim_(dim), t_lo_(t_lo), t_hi_(t_hi) {
    if (dim_ >= 4 && t_hi_ > t_lo_) build_table();
  }

  double draw(Rng& rng) const {
    const double u = uniform01(rng);
    if (t_hi_ <= t_lo_) return t_hi_;
    if (dim_ == 2) {
      // theta uniform on [phi_lo, phi_hi]; t = cos(theta).
      const double a_lo = std::acos(std::clamp(t_hi_, -1.0, 1.0));
      const double a_hi = std::acos(std::clamp(t_lo_, -1.0, 1.0));
      return std::cos(a_lo + u * (a_hi - a_lo));
    }
    if (dim_ == 3) {
      return t_lo_ + u * (t_hi_ - t_lo_);  // flat marginal
    }
    return interpolate(u);
  }

 private:
  static constexpr int kTablePoints = 4096;

  void build_table() {
    const double expo = 0.5 * (dim_ - 3);
    std::vector<double> logw(kTablePoints);
    double logmax = -std::numeric_limits<double>::infinity();
    grid_.resize(kTablePoints);
    for (int i = 0; i < kTablePoints; ++i) {
      const double t =
          t_lo_ + (t_hi_ - t_lo_) * static_cast<double>(i) / (kTablePoints - 1);
      grid_[i] = t;
      const double one_minus_t2 = std::max(1.0 - t * t, 0.0);
      logw[i] = one_minus_t2 > 0.0
                    ? expo * std::log(one_minus_t2)
                    : -std::numeric_limits<double>::infinity();
      logmax = std::max(logmax, logw[i]);
    }
    cdf_.assign(kTablePoints, 0.0);
    double acc = 0.0;
    double prev = std::exp(logw[0] - logmax);
    for (int i = 1; i < kTablePoints; ++i) {
      const double cur = std::exp(logw[i] - logmax);
      acc += 0.5 * (prev + cur) * (grid_[i] - grid_[i - 1]);
      cdf_[i] = acc;
      prev = cur;
    }
    for (double& c : cdf_) c /= acc;
  }

  double interpolate(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    if (it == cdf_.end()) return grid_.back();
    const std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
    const std::size_t lo = hi - 1;
    const double span = cdf_[hi] - cdf_[lo];
    const double frac = span > 0.0 ? (u - cdf_[lo]) / span : 0.5;
    return grid_[lo] + frac * (grid_[hi] - grid_[lo]);
  }

  int dim_;
  double t_lo_;
  double t_hi_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

}  // namespace detail

// n independent uniform draws from the cap. Deterministic given the seed.
inline std::vector<Eigen::VectorXd> sample_cap(const SphericalCap& cap, int n,
                                               std::uint64_t seed) {
  if (n < 1) throw std::domain_error("sample_cap: n must be >= 1");
  const int dim = static_cast<int>(cap.center.size());
  if (dim < 2) throw std::domain_error("sample_cap: dim must be >= 2");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  if (cap.half_angle == 0.0) {
    out.assign(n, cap.center);
    return out;
  }
  Rng rng(seed);
  const detail::CapMarginalSampler marginal(dim, std::cos(cap.half_angle),
                                            1.0);
  for (int i = 0; i < n; ++i) {
    const double t = marginal.draw(rng);
    const Eigen::VectorXd u = unit_orthogonal_to(cap.center, rng);
    out.push_back(t * cap.center + std::sqrt(std::max(1.0 - t * t, 0.0)) * u);
  }
  return out;
}

// Halfspace normal . w >= offset.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

// Consistency polytope: one homogeneous halfspace per explanation plus the
// box ||w||_inf <= box_bound. `interior` is the strictly feasible point
// found by the construction-time probe.
struct ConsistencyPolytope {
  std::vector<Halfspace> halfspaces;
  double box_bound = 1.0;
  int dim = 0;
  Eigen::VectorXd interior;

  double min_slack(const Eigen::VectorXd& w) const {
    double s = box_bound - w.lpNorm<Eigen::Infinity>();
    for (const auto& h : halfspaces) {
      s = std::min(s, h.normal.dot(w) - h.offset);
    }
    return s;
  }

  bool contains(const Eigen::VectorXd& w) const { return min_slack(w) >= 0.0; }
};

namespace detail {

// Feasibility probe, Chebyshev-center style: a perceptron pass certifies
// strict feasibility of the homogeneous constraints, then subgradient ascent
// on the minimum normalized slack fattens the point for walk conditioning.
inline Eigen::VectorXd find_interior_point(
    const std::vector<Eigen::VectorXd>& unit_normals, int dim, double box) {
  if (unit_normals.empty()) return Eigen::VectorXd::Zero(dim);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  for (const auto& a : unit_normals) w += a;
  const long max_updates = 200000;
  long updates = 0;
  while (updates < max_updates) {
    double worst = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd* worst_a = nullptr;
    for (const auto& a : unit_normals) {
      const double s = a.dot(w);
      if (s < worst) {
        worst = s;
        worst_a = &a;
      }
    }
    if (worst > 0.0) break;
    w += *worst_a;
    ++updates;
  }
  if (updates >= max_updates) {
    throw InfeasiblePolytopeError(
        "polytope_from_explanations: no strictly interior point found");
  }
  w *= (0.5 * box) / w.lpNorm<Eigen::Infinity>();

  // Subgradient polish of J(w) = min(min_i a_i.w, min_j (box - |w_j|)).
  auto slack_and_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : unit_normals) {
      const double s = a.dot(x);
      if (s < best) {
        best = s;
        g = a;
      }
    }
    for (int j = 0; j < dim; ++j) {
      const double s = box - std::fabs(x[j]);
      if (s < best) {
        best = s;
        g = Eigen::VectorXd::Zero(dim);
        g[j] = x[j] > 0.0 ? -1.0 : 1.0;
      }
    }
    return best;
  };
  Eigen::VectorXd best_w = w;
  Eigen::VectorXd grad(dim);
  double best_j = slack_and_grad(w, grad);
  for (int k = 1; k <= 500; ++k) {
    const double j = slack_and_grad(w, grad);
    if (j > best_j) {
      best_j = j;
      best_w = w;
    }
    w += (0.25 * box / std::sqrt(static_cast<double>(k))) * grad;
  }
  if (!(best_j > 0.0)) {
    throw InfeasiblePolytopeError(
        "polytope_from_explanations: probe slack is not strictly positive");
  }
  return best_w;
}

}  // namespace detail

inline ConsistencyPolytope polytope_from_explanations(
    const ExplanationSet& expl, double box_bound = 1.0) {
  if (expl.size() == 0) {
    throw std::domain_error("polytope_from_explanations: empty explanations");
  }
  if (!(box_bound > 0.0)) {
    throw std::domain_error("polytope_from_explanations: box_bound must be > 0");
  }
  ConsistencyPolytope poly;
  poly.box_bound = box_bound;
  poly.dim = static_cast<int>(expl.points.cols());
  std::vector<Eigen::VectorXd> unit_normals;
  for (Eigen::Index i = 0; i < expl.size(); ++i) {
    Eigen::VectorXd a = expl.labels[i] * expl.points.row(i).transpose();
    const double norm = a.norm();
    if (norm < 1e-300) {
      // The zero point is labeled +1 by every model (sign(0) = +1).
      if (expl.labels[i] == +1) continue;
      throw InfeasiblePolytopeError(
          "polytope_from_explanations: origin labeled -1 is unsatisfiable");
    }
    poly.halfspaces.push_back({a, 0.0});
    unit_normals.push_back(a / norm);
  }
  poly.interior =
      detail::find_interior_point(unit_normals, poly.dim, box_bound);
  return poly;
}

// Hit-and-run over the polytope, pre-normalization. Each step picks a uniform
// direction and a uniform point on the feasible chord. Returns n states taken
// every `thin` steps after `burn_in` steps.
inline std::vector<Eigen::VectorXd> hit_and_run_raw(
    const ConsistencyPolytope& poly, int n, int burn_in, int thin,
    std::uint64_t seed) {
  if (n < 1) throw std::domain_error("hit_and_run_raw: n must be >= 1");
  if (thin < 1) throw std::domain_error("hit_and_run_raw: thin must be >= 1");
  if (burn_in < 0) throw std::domain_error("hit_and_run_raw: burn_in < 0");
  Rng rng(seed);
  Eigen::VectorXd w = poly.interior;
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  int stuck = 0;
  const std::int64_t total =
      static_cast<std::int64_t>(burn_in) + static_cast<std::int64_t>(n) * thin;
  for (std::int64_t step = 1; step <= total; ++step) {
    const Eigen::VectorXd u = uniform_unit_vector(poly.dim, rng);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& h : poly.halfspaces) {
      const double du = h.normal.dot(u);
      if (du == 0.0) continue;
      const double bound = (h.offset - h.normal.dot(w)) / du;
      if (du > 0.0) {
        lo = std::max(lo, bound);
      } else {
        hi = std::min(hi, bound);
      }
    }
    for (int j = 0; j < poly.dim; ++j) {
      if (u[j] == 0.0) continue;
      const double b1 = (poly.box_bound - w[j]) / u[j];
      const double b2 = (-poly.box_bound - w[j]) / u[j];
      hi = std::min(hi, std::max(b1, b2));
      lo = std::max(lo, std::min(b1, b2));
    }
    const double len = hi - lo;
    if (!(len > 1e-14)) {
      if (++stuck >= 100) {
        throw StuckWalkError("hit_and_run_raw: chord collapsed");
      }
    } else {
      stuck = 0;
      // Stay strictly inside the chord so accumulated rounding cannot
      // push the state through a face.
      const double s = uniform_in(rng, lo + 1e-9 * len, hi - 1e-9 * len);
      w += s * u;
    }
    if (step > burn_in && (step - burn_in) % thin == 0) {
      out.push_back(w);
    }
  }
  return out;
}

// Sign classifiers are scale-invariant; samples are reported on the sphere.
inline std::vector<Eigen::VectorXd> hit_and_run_sample(
    const ConsistencyPolytope& poly, int n, int burn_in, int thin,
    std::uint64_t seed) {
  std::vector<Eigen::VectorXd> raw =
      hit_and_run_raw(poly, n, burn_in, thin, seed);
  for (auto& w : raw) {
    const double norm = w.norm();
    if (norm > 0.0) w /= norm;
  }
  return raw;
}

}  // namespace margin_guard
