#include "margin_guard/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using margin_guard::adaptive_simpson;

TEST(AdaptiveSimpson, Polynomial) {
  // int_0^1 x^3 = 1/4, exact for Simpson.
  const double v = adaptive_simpson([](double x) { return x * x * x; }, 0, 1);
  EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(AdaptiveSimpson, Oscillatory) {
  const double v =
      adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI);
  EXPECT_NEAR(v, 2.0, 1e-9);
}

TEST(AdaptiveSimpson, SqrtEndpointSingularity) {
  // Derivative singularity at the right endpoint, like the cap profile at
  // theta = phi for d = 3.
  const double v = adaptive_simpson(
      [](double x) { return std::sqrt(std::max(1.0 - x, 0.0)); }, 0.0, 1.0);
  EXPECT_NEAR(v, 2.0 / 3.0, 1e-8);
}

TEST(AdaptiveSimpson, EmptyInterval) {
  EXPECT_EQ(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0), 0.0);
}

TEST(AdaptiveSimpson, ReversedIntervalThrows) {
  EXPECT_THROW(adaptive_simpson([](double) { return 1.0; }, 1.0, 0.0),
               std::domain_error);
}

TEST(AdaptiveSimpson, BudgetCapStillReturns) {
  const double v = adaptive_simpson(
      [](double x) { return std::sin(50.0 * x); }, 0.0, M_PI, 1e-12, 64);
  EXPECT_TRUE(std::isfinite(v));
}
