#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "margin_guard/quadrature.hpp"

// Closed-form boundary certainty for homogeneous linear models over the unit
// sphere with a uniform prior, plus the two analytic upper-bound checks.
//
// Everything is phrased in the two cap angles:
//   phi = arcsin(alpha)   half-angle of the version-space cap,
//   psi = 2 arcsin(r/2)   angular thickness of the boundary band.

namespace margin_guard {

inline double angle_phi(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("angle_phi: alpha must lie in [0, 1)");
  }
  return std::asin(alpha);
}

inline double angle_psi(double r) {
  if (!(r > 0.0 && r <= 2.0)) {
    throw std::domain_error("angle_psi: r must lie in (0, 2]");
  }
  return 2.0 * std::asin(0.5 * r);
}

struct CapGeometry {
  int dim = 2;        // ambient dimension d >= 2
  double alpha = 0.0; // margin cutoff, sin(phi)
  double phi = 0.0;   // cap half-angle, in [0, pi/2)
  double r = 1.0;     // manipulation radius, 2 sin(psi/2)
  double psi = 0.0;   // boundary thickness angle, in (0, pi]

  static CapGeometry from_alpha_r(int dim, double alpha, double r) {
    if (dim < 2) throw std::domain_error("CapGeometry: dim must be >= 2");
    CapGeometry g;
    g.dim = dim;
    g.alpha = alpha;
    g.phi = angle_phi(alpha);
    g.r = r;
    g.psi = angle_psi(r);
    return g;
  }

  static CapGeometry from_angles(int dim, double phi, double psi) {
    if (dim < 2) throw std::domain_error("CapGeometry: dim must be >= 2");
    if (!(phi >= 0.0 && phi < 0.5 * M_PI)) {
      throw std::domain_error("CapGeometry: phi must lie in [0, pi/2)");
    }
    if (!(psi > 0.0 && psi <= M_PI)) {
      throw std::domain_error("CapGeometry: psi must lie in (0, pi]");
    }
    CapGeometry g;
    g.dim = dim;
    g.phi = phi;
    g.alpha = std::sin(phi);
    g.psi = psi;
    g.r = 2.0 * std::sin(0.5 * psi);
    return g;
  }
};

// Projected cap density profile, clamped to zero outside [-phi, phi]:
//   F(theta) = (1 - cos^2(phi)/cos^2(theta))_+^{(d-2)/2}.
// The base is evaluated as (sin phi - sin t)(sin phi + sin t)/cos^2 t, which
// stays accurate near t = phi where the direct form cancels catastrophically.
inline double cap_density_profile(double theta, double phi, int dim) {
  if (!(std::fabs(theta) < 0.5 * M_PI)) {
    throw std::domain_error(
        "cap_density_profile: theta must lie in (-pi/2, pi/2)");
  }
  if (!(phi >= 0.0 && phi < 0.5 * M_PI)) {
    throw std::domain_error(
        "cap_density_profile: phi must lie in [0, pi/2)");
  }
  if (dim < 2) throw std::domain_error("cap_density_profile: dim must be >= 2");
  const double t = std::fabs(theta);
  if (t > phi) return 0.0;
  const double ct = std::cos(t);
  const double sp = std::sin(phi);
  const double st = std::sin(t);
  const double base = std::max((sp - st) * (sp + st) / (ct * ct), 0.0);
  const double expo = 0.5 * (dim - 2);
  if (expo == 0.0) return 1.0;  // d = 2: flat profile on the support
  return std::pow(base, expo);
}

// Worst-pair certainty over the boundary band:
//   Pi = 1                                         if psi > 2 phi,
//   Pi = int_0^{psi/2} F / int_0^{phi} F           otherwise.
// Ties psi == 2 phi take the integral branch (both branches agree).
// d = 2 uses the exact arc ratio min(1, psi/(2 phi)); the quadrature path is
// adaptive Simpson at 1e-9 absolute tolerance. Both integration limits stop
// at the support edge phi, so no interior split is needed. The ratio is
// invariant under scaling F, so the integrand is normalized by its peak
// F(0) = sin(phi)^{d-2} (in log space): otherwise both integrals shrink like
// sin(phi)^{d-2} and the 1e-9 absolute tolerance would swamp the quotient.
inline double pi_closed_form(const CapGeometry& g) {
  if (g.psi > 2.0 * g.phi) return 1.0;
  if (g.dim == 2) {
    return std::min(1.0, g.psi / (2.0 * g.phi));
  }
  const double sp = std::sin(g.phi);
  const double log_sp2 = 2.0 * std::log(sp);
  const double expo = 0.5 * (g.dim - 2);
  const auto normalized_profile = [&](double t) {
    const double st = std::sin(std::fabs(t));
    if (st >= sp) return 0.0;
    const double log_base = std::log((sp - st) * (sp + st)) -
                            2.0 * std::log(std::cos(t)) - log_sp2;
    return std::exp(expo * log_base);
  };
  const double num = adaptive_simpson(normalized_profile, 0.0, 0.5 * g.psi, 1e-9);
  const double den = adaptive_simpson(normalized_profile, 0.0, g.phi, 1e-9);
  return std::clamp(num / den, 0.0, 1.0);
}

struct BoundVerdict {
  bool applicable = false;
  double bound = 0.0;
  double pi = 0.0;
  bool holds = true;
};

// Large-alpha regime: alpha >= 1 - 1/(8d) implies Pi <= 9 psi.
inline BoundVerdict check_large_alpha_bound(const CapGeometry& g) {
  BoundVerdict v;
  v.applicable = g.alpha >= 1.0 - 1.0 / (8.0 * g.dim);
  v.bound = 9.0 * g.psi;
  v.pi = pi_closed_form(g);
  v.holds = !v.applicable || v.pi <= v.bound;
  return v;
}

// Refined variant: cos(phi) <= 1/(2 d^{1/4}) implies
// Pi <= 6 psi (1 + sqrt(d) cos(phi)).
inline BoundVerdict check_refined_alpha_bound(const CapGeometry& g) {
  BoundVerdict v;
  const double cosphi = std::cos(g.phi);
  v.applicable = cosphi <= 1.0 / (2.0 * std::pow(g.dim, 0.25));
  v.bound = 6.0 * g.psi * (1.0 + std::sqrt(static_cast<double>(g.dim)) * cosphi);
  v.pi = pi_closed_form(g);
  v.holds = !v.applicable || v.pi <= v.bound;
  return v;
}

}  // namespace margin_guard
