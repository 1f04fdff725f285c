#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace margin_guard {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::VectorXd gaussian_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z[i] = normal(rng);
  return z;
}

inline Eigen::VectorXd uniform_unit_vector(int dim, Rng& rng) {
  Eigen::VectorXd z = gaussian_vector(dim, rng);
  double norm = z.norm();
  while (norm < 1e-12) {
    z = gaussian_vector(dim, rng);
    norm = z.norm();
  }
  return z / norm;
}

// Uniform unit vector in the orthogonal complement of `axis` (unit vector).
inline Eigen::VectorXd unit_orthogonal_to(const Eigen::VectorXd& axis,
                                          Rng& rng) {
  Eigen::VectorXd z = gaussian_vector(static_cast<int>(axis.size()), rng);
  z -= axis.dot(z) * axis;
  double norm = z.norm();
  while (norm < 1e-12) {
    z = gaussian_vector(static_cast<int>(axis.size()), rng);
    z -= axis.dot(z) * axis;
    norm = z.norm();
  }
  return z / norm;
}

}  // namespace margin_guard
