#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "margin_guard/errors.hpp"
#include "margin_guard/quadrature.hpp"
#include "margin_guard/random.hpp"
#include "margin_guard/version_space.hpp"

// Executable constructions of the worked negative results: the 1D threshold
// class, a finite non-spherical feature set where more margin-distancing
// raises certainty, a non-uniform prior with the same reversal, and a
// non-homogeneous class whose certainty never drops below 1/3.

namespace margin_guard {

// 1D thresholds sign(x - w), w uniform on [x_minus, x_plus]:
//   pi(x, x') = (min(x', x_plus) - x) / (x_plus - x_minus).
inline double threshold_1d_pi(double x_minus, double x_plus, double x,
                              double x_prime) {
  if (!(x_minus < x_plus)) {
    throw std::domain_error("threshold_1d_pi: requires x_minus < x_plus");
  }
  if (!(x_minus < x && x < x_plus)) {
    throw std::domain_error("threshold_1d_pi: x must lie in (x_minus, x_plus)");
  }
  if (!(x < x_prime)) {
    throw std::domain_error("threshold_1d_pi: requires x < x_prime");
  }
  return (std::min(x_prime, x_plus) - x) / (x_plus - x_minus);
}

// Five-point planar feature set violating the spherical assumption. The only
// boundary pair is (z2, z1); x1, x2, x3 pin the version-space arc. Narrowing
// the released set from {x1, x2, x3} (cutoff alpha2) to {x1, x2} (cutoff
// alpha1) widens the arc on the side that favors the flip, so certainty
// rises: pi(alpha1) = (mu + theta)/(mu + nu) >= (gamma + theta)/(gamma + nu)
// = pi(alpha2).
struct NonSphericalScenario {
  double gamma = 0.0, mu = 0.0, theta = 0.0, nu = 0.0;  // gamma < mu < theta < nu
  double alpha1_prime = 0.0, alpha2_prime = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0, r = 0.0;
  Eigen::Vector2d x1, x2, x3, z1, z2;

  static NonSphericalScenario make(double gamma, double mu, double theta,
                                   double nu, double alpha1_prime,
                                   double alpha2_prime, double r) {
    if (!(0.0 < gamma && gamma < mu && mu < theta && theta < nu)) {
      throw std::domain_error(
          "NonSphericalScenario: need 0 < gamma < mu < theta < nu");
    }
    if (!(theta + nu < 0.5 * M_PI)) {
      throw std::domain_error("NonSphericalScenario: need theta + nu < pi/2");
    }
    if (!(0.0 < r && r < alpha2_prime && alpha2_prime < alpha1_prime)) {
      throw std::domain_error(
          "NonSphericalScenario: need 0 < r < alpha2' < alpha1'");
    }
    NonSphericalScenario s;
    s.gamma = gamma;
    s.mu = mu;
    s.theta = theta;
    s.nu = nu;
    s.alpha1_prime = alpha1_prime;
    s.alpha2_prime = alpha2_prime;
    s.alpha2 = 0.5 * alpha2_prime;
    s.alpha1 = 0.5 * (alpha1_prime + alpha2_prime);
    s.r = r;
    s.x1 = {alpha1_prime, -alpha1_prime / std::tan(mu)};
    s.x2 = {alpha1_prime, alpha1_prime / std::tan(nu)};
    s.x3 = {alpha2_prime, -alpha2_prime / std::tan(gamma)};
    s.z1 = {0.5 * r * std::sin(theta), 0.5 * r * std::cos(theta)};
    s.z2 = {-0.5 * r * std::sin(theta), 0.5 * r * std::cos(theta)};
    return s;
  }

  // The concrete numeric instance exercised throughout the tests.
  static NonSphericalScenario reference() {
    return make(M_PI / 16.0, M_PI / 12.0, M_PI / 8.0, M_PI / 4.0, 10.0, 5.0,
                1.0);
  }
};

enum class CutoffChoice { alpha1, alpha2 };

// Exact arc-ratio certainty of the single boundary pair under either cutoff.
inline double non_spherical_pi(const NonSphericalScenario& s,
                               CutoffChoice which) {
  if (which == CutoffChoice::alpha1) {
    return (s.mu + s.theta) / (s.mu + s.nu);
  }
  return (s.gamma + s.theta) / (s.gamma + s.nu);
}

// Non-uniform prior over homogeneous models on the d-sphere (d >= 3): uniform
// on the inner cap (half-angle arcsin(alpha2)); on the shell between the two
// caps, all mass sits on the wedge that predicts the canonical pair
// differently. Inner and shell masses follow the caps' uniform surface
// measures. Certainty for the pair then strictly rises when the cutoff grows
// from alpha2 to alpha1.
struct NonUniformPriorConfig {
  int dim = 3;
  double alpha1 = 0.8;
  double alpha2 = 0.5;
  double psi = 0.3;
  long long n = 100000;
  std::uint64_t seed = 0;
};

struct NonUniformPriorEstimate {
  double pi1_hat = 0.0;  // under the prior restricted to the alpha1 cap
  double pi2_hat = 0.0;  // under the prior restricted to the alpha2 cap
  double se1 = 0.0;
  double se2 = 0.0;
  long long shell_draws = 0;
};

namespace detail {

// Relative uniform surface measure of a cap with half-angle phi:
// integral of sin^{d-2}(theta) over [0, phi].
inline double cap_measure(int dim, double phi) {
  return adaptive_simpson(
      [dim](double t) {
        return std::pow(std::sin(t), static_cast<double>(dim - 2));
      },
      0.0, phi, 1e-10);
}

}  // namespace detail

inline NonUniformPriorEstimate non_uniform_prior_estimate(
    const NonUniformPriorConfig& cfg,
    std::vector<Eigen::VectorXd>* shell_samples_out = nullptr) {
  if (cfg.dim < 3) {
    throw std::domain_error("non_uniform_prior_estimate: dim must be >= 3");
  }
  if (!(0.0 < cfg.alpha2 && cfg.alpha2 < cfg.alpha1 && cfg.alpha1 < 1.0)) {
    throw std::domain_error(
        "non_uniform_prior_estimate: need 0 < alpha2 < alpha1 < 1");
  }
  if (!(cfg.psi > 0.0 && 0.5 * cfg.psi < std::asin(cfg.alpha2))) {
    throw std::domain_error(
        "non_uniform_prior_estimate: need arcsin(alpha2) > psi/2");
  }
  if (cfg.n < 1) throw std::domain_error("non_uniform_prior_estimate: n < 1");

  const int d = cfg.dim;
  const double phi1 = std::asin(cfg.alpha1);
  const double phi2 = std::asin(cfg.alpha2);
  Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
  center[0] = 1.0;
  Eigen::VectorXd x(d), xp(d);
  x.setZero();
  xp.setZero();
  x[0] = -std::sin(0.5 * cfg.psi);
  x[1] = std::cos(0.5 * cfg.psi);
  xp[0] = std::sin(0.5 * cfg.psi);
  xp[1] = std::cos(0.5 * cfg.psi);

  // Inner-cap estimate (the restriction of the prior to the alpha2 cap is
  // uniform there).
  Rng rng(cfg.seed);
  long long in_x = 0, in_xp = 0;
  {
    const detail::CapMarginalSampler marginal(d, std::cos(phi2), 1.0);
    for (long long i = 0; i < cfg.n; ++i) {
      const double t = marginal.draw(rng);
      const Eigen::VectorXd u = unit_orthogonal_to(center, rng);
      const Eigen::VectorXd w =
          t * center + std::sqrt(std::max(1.0 - t * t, 0.0)) * u;
      in_x += w.dot(x) >= 0.0;
      in_xp += w.dot(xp) >= 0.0;
    }
  }

  const double nn = static_cast<double>(cfg.n);
  NonUniformPriorEstimate out;
  {
    const double p1 = in_xp / nn, p2 = in_x / nn;
    out.pi2_hat = (in_xp - in_x) / nn;
    out.se2 =
        std::sqrt(p1 * (1.0 - p1) / nn) + std::sqrt(p2 * (1.0 - p2) / nn);
  }

  // Mixture estimate for the alpha1 cap: inner component with probability
  // proportional to the inner cap's measure, wedge-restricted shell
  // otherwise. Shell draws are rejection-sampled against the two sign
  // constraints; they predict (x -> -1, x' -> +1) by construction.
  const double p_inner =
      detail::cap_measure(d, phi2) / detail::cap_measure(d, phi1);
  const detail::CapMarginalSampler inner_marginal(d, std::cos(phi2), 1.0);
  const detail::CapMarginalSampler shell_marginal(d, std::cos(phi1),
                                                  std::cos(phi2));
  long long mix_x = 0, mix_xp = 0;
  long long shell_attempts = 0, shell_accepts = 0;
  for (long long i = 0; i < cfg.n; ++i) {
    if (uniform01(rng) < p_inner) {
      const double t = inner_marginal.draw(rng);
      const Eigen::VectorXd u = unit_orthogonal_to(center, rng);
      const Eigen::VectorXd w =
          t * center + std::sqrt(std::max(1.0 - t * t, 0.0)) * u;
      mix_x += w.dot(x) >= 0.0;
      mix_xp += w.dot(xp) >= 0.0;
    } else {
      while (true) {
        ++shell_attempts;
        const double t = shell_marginal.draw(rng);
        const Eigen::VectorXd u = unit_orthogonal_to(center, rng);
        const Eigen::VectorXd w =
            t * center + std::sqrt(std::max(1.0 - t * t, 0.0)) * u;
        if (w.dot(x) < 0.0 && w.dot(xp) >= 0.0) {
          ++shell_accepts;
          ++out.shell_draws;
          mix_xp += 1;  // wedge membership fixes both predictions
          if (shell_samples_out) shell_samples_out->push_back(w);
          break;
        }
        if (shell_attempts >= 10000 &&
            static_cast<double>(shell_accepts) / shell_attempts < 1e-4) {
          throw SamplerError(
              "non_uniform_prior_estimate: wedge acceptance below 1e-4");
        }
      }
    }
  }
  {
    const double p1 = mix_xp / nn, p2 = mix_x / nn;
    out.pi1_hat = (mix_xp - mix_x) / nn;
    out.se1 =
        std::sqrt(p1 * (1.0 - p1) / nn) + std::sqrt(p2 * (1.0 - p2) / nn);
  }
  return out;
}

// Equal mixture of homogeneous circle classifiers and the same class shifted
// to pass through (0, 1). Conditioning on any nonempty explanation set keeps
// the whole shifted component predicting the canonical pair differently, so
// certainty never falls below its 1/3 posterior share:
//   Pi = (2/3) min(1, psi / (2 (pi/2 - gamma))) + 1/3,  gamma = arccos(alpha).
struct MixtureClassParams {
  double gamma = 0.0;  // arccos(alpha), in (0, pi/2]
  double psi = 0.0;    // in (0, pi]
};

inline double mixture_class_pi(const MixtureClassParams& p) {
  if (!(p.gamma > 0.0 && p.gamma <= 0.5 * M_PI)) {
    throw std::domain_error("mixture_class_pi: gamma must lie in (0, pi/2]");
  }
  if (!(p.psi > 0.0 && p.psi <= M_PI)) {
    throw std::domain_error("mixture_class_pi: psi must lie in (0, pi]");
  }
  if (p.gamma == 0.5 * M_PI) return 1.0;
  const double halfwidth = 0.5 * M_PI - p.gamma;
  return (2.0 / 3.0) * std::min(1.0, p.psi / (2.0 * halfwidth)) + 1.0 / 3.0;
}

}  // namespace margin_guard
