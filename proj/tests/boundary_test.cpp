#include "margin_guard/boundary.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "margin_guard/random.hpp"

namespace mg = margin_guard;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

mg::LinearModel axis_model(int dim) {
  mg::LinearModel m;
  m.w = VectorXd::Zero(dim);
  m.w[0] = 1.0;
  return m;
}

// Unpruned all-pairs reference.
std::vector<std::pair<int, int>> brute_force_pairs(const MatrixXd& pts,
                                                   const mg::LinearModel& m,
                                                   double r,
                                                   bool positive_flip_only) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < pts.rows(); ++i) {
    for (int j = 0; j < pts.rows(); ++j) {
      if (i == j) continue;
      const int li = m.predict(pts.row(i).transpose());
      const int lj = m.predict(pts.row(j).transpose());
      if (li != -1 || lj != 1) continue;
      if ((pts.row(i) - pts.row(j)).norm() < r) {
        out.emplace_back(i, j);
        if (!positive_flip_only) out.emplace_back(j, i);
      }
    }
  }
  return out;
}

}  // namespace

TEST(BoundaryPairs, CanonicalPairAtPsi) {
  const double psi = 0.8;
  const double s = std::sin(0.5 * psi), c = std::cos(0.5 * psi);
  MatrixXd pts(2, 2);
  pts << s, c,   // positive point
      -s, c;     // negative point
  const auto found = mg::boundary_pairs(
      pts, axis_model(2), {2.0 * s + 1e-9, true});
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found.pairs[0], std::make_pair(1, 0));
}

TEST(BoundaryPairs, NoFlipNoPairs) {
  MatrixXd pts(2, 2);
  pts << 0.5, 0.5, 0.4, 0.6;
  const auto found = mg::boundary_pairs(pts, axis_model(2), {1.0, true});
  EXPECT_TRUE(found.empty());
}

TEST(BoundaryPairs, StrictDistance) {
  MatrixXd pts(2, 2);
  pts << 0.1, 0.0, -0.1, 0.0;
  // Distance exactly 0.2: excluded by the strict inequality.
  EXPECT_TRUE(mg::boundary_pairs(pts, axis_model(2), {0.2, true}).empty());
  EXPECT_EQ(mg::boundary_pairs(pts, axis_model(2), {0.2 + 1e-12, true}).size(),
            1u);
}

TEST(BoundaryPairs, PrunedMatchesBruteForce) {
  mg::Rng rng(41);
  const int n = 1000, dim = 5;
  MatrixXd pts(n, dim);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = mg::uniform_unit_vector(dim, rng).transpose();
  }
  const auto model = axis_model(dim);
  for (const bool pos_only : {true, false}) {
    const auto fast = mg::boundary_pairs(pts, model, {0.3, pos_only});
    const auto slow = brute_force_pairs(pts, model, 0.3, pos_only);
    const std::set<std::pair<int, int>> a(fast.pairs.begin(),
                                          fast.pairs.end());
    const std::set<std::pair<int, int>> b(slow.begin(), slow.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(fast.pairs.size(), slow.size());
  }
}

TEST(BoundaryPairs, SymmetricModeMirrors) {
  mg::Rng rng(43);
  MatrixXd pts(200, 3);
  for (int i = 0; i < 200; ++i) {
    pts.row(i) = mg::uniform_unit_vector(3, rng).transpose();
  }
  const auto both = mg::boundary_pairs(pts, axis_model(3), {0.4, false});
  const std::set<std::pair<int, int>> have(both.pairs.begin(),
                                           both.pairs.end());
  for (const auto& [i, j] : both.pairs) {
    EXPECT_TRUE(have.count({j, i})) << i << "," << j;
  }
}

TEST(BoundaryPairs, BiasedModelPruningStaysSound) {
  mg::Rng rng(47);
  MatrixXd pts(300, 2);
  for (int i = 0; i < 300; ++i) {
    pts.row(i) = (mg::gaussian_vector(2, rng) * 0.7).transpose();
  }
  mg::LinearModel m;
  m.w = VectorXd(2);
  m.w << 2.0, -1.0;  // non-unit weights exercise the |f| <= r ||w|| filter
  m.b = 0.3;
  const auto fast = mg::boundary_pairs(pts, m, {0.25, true});
  const auto slow = brute_force_pairs(pts, m, 0.25, true);
  const std::set<std::pair<int, int>> a(fast.pairs.begin(), fast.pairs.end());
  const std::set<std::pair<int, int>> b(slow.begin(), slow.end());
  EXPECT_EQ(a, b);
}

TEST(BoundaryPairs, DimensionMismatchThrows) {
  MatrixXd pts(2, 3);
  pts.setZero();
  EXPECT_THROW(mg::boundary_pairs(pts, axis_model(2), {0.5, true}),
               std::domain_error);
}

TEST(BandMembership, Examples) {
  VectorXd w_star(2);
  w_star << 1, 0;
  const double r = 1.0;  // psi = pi/3, sin psi ~= 0.8660
  // Bit-exact boundary point: the same expression the band test evaluates.
  const double sin_psi = std::sin(2.0 * std::asin(0.5 * r));
  MatrixXd pts(3, 2);
  pts << 0.5, std::sqrt(3.0) / 2.0,                       // inside the band
      0.9, std::sqrt(1.0 - 0.81),                         // outside
      sin_psi, std::sqrt(1.0 - sin_psi * sin_psi);        // half-open, out
  const auto flags = mg::band_membership(pts, w_star, r);
  EXPECT_TRUE(flags[0]);
  EXPECT_FALSE(flags[1]);
  EXPECT_FALSE(flags[2]);
}

TEST(BandMembership, NormalizationError) {
  VectorXd w_star(2);
  w_star << 1, 0;
  MatrixXd pts(1, 2);
  pts << 0.5, 0.5;  // norm != 1
  EXPECT_THROW(mg::band_membership(pts, w_star, 1.0), std::domain_error);
}

TEST(BandMembership, PairMembersLieInBand) {
  // Every index appearing in a pair is a band member (the converse can fail
  // on finite samples).
  mg::Rng rng(53);
  MatrixXd pts(500, 3);
  for (int i = 0; i < 500; ++i) {
    pts.row(i) = mg::uniform_unit_vector(3, rng).transpose();
  }
  const double r = 0.5;
  const auto model = axis_model(3);
  const auto pairs = mg::boundary_pairs(pts, model, {r, true});
  const auto flags = mg::band_membership(pts, model.w, r);
  for (const auto& [i, j] : pairs.pairs) {
    EXPECT_TRUE(flags[i]);
    EXPECT_TRUE(flags[j]);
  }
}

TEST(GroupComposition, Examples) {
  EXPECT_FALSE(mg::group_composition({false, false}, {"a", "b"}).has_value());

  const auto one = mg::group_composition({true, true, false}, {"a", "a", "b"});
  ASSERT_TRUE(one.has_value());
  EXPECT_EQ(one->size(), 1u);
  EXPECT_DOUBLE_EQ(one->at("a"), 1.0);

  const auto two =
      mg::group_composition({true, false, true, true}, {"a", "b", "b", "b"});
  ASSERT_TRUE(two.has_value());
  EXPECT_NEAR(two->at("a"), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(two->at("b"), 2.0 / 3.0, 1e-15);
}

TEST(GroupComposition, LengthMismatchThrows) {
  EXPECT_THROW(mg::group_composition({true}, {"a", "b"}), std::domain_error);
}
