#pragma once

#include <Eigen/Dense>

namespace margin_guard {

// Linear classifier x -> sign(w.x + b), with sign(0) = +1.
struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;

  int dim() const { return static_cast<int>(w.size()); }

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return w.dot(x) + b;
  }

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return decision(x) >= 0.0 ? +1 : -1;
  }
};

}  // namespace margin_guard
