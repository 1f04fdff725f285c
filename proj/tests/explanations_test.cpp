#include "margin_guard/explanations.hpp"

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
using Eigen::VectorXi;

namespace {

MatrixXd column(const std::vector<double>& xs) {
  MatrixXd m(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<int>(i), 0) = xs[i];
  return m;
}

// Exhaustive k-medoid reference over all medoid subsets.
double exhaustive_kmedoid_cost(const MatrixXd& pts, int k) {
  const int n = static_cast<int>(pts.rows());
  std::vector<int> medoids(k);
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> choose(n, false);
  std::fill(choose.begin(), choose.begin() + k, true);
  std::sort(choose.begin(), choose.end());  // all-false-first for permutations
  do {
    int idx = 0;
    for (int i = 0; i < n; ++i) {
      if (choose[i]) medoids[idx++] = i;
    }
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int m : medoids) {
        nearest = std::min(nearest, (pts.row(i) - pts.row(m)).norm());
      }
      cost += nearest;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(choose.begin(), choose.end()));
  return best;
}

mg::ExplanationSet margins_only(const std::vector<double>& margins,
                                const std::vector<int>& labels) {
  mg::ExplanationSet e;
  e.points = MatrixXd::Zero(margins.size(), 1);
  for (std::size_t i = 0; i < margins.size(); ++i) {
    e.points(static_cast<int>(i), 0) = static_cast<double>(i);
  }
  e.margins = Eigen::Map<const VectorXd>(margins.data(), margins.size());
  e.labels.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    e.labels[static_cast<int>(i)] = labels[i];
  }
  return e;
}

}  // namespace

TEST(FitLinear, OneDimensionalSeparation) {
  MatrixXd pts(2, 1);
  pts << -1, 1;
  VectorXi y(2);
  y << -1, 1;
  const auto model = mg::fit_linear(pts, y);
  EXPECT_GT(model.w[0], 0.0);
  EXPECT_EQ(model.b, 0.0);  // homogeneous by default
}

TEST(FitLinear, RejectsSingleClass) {
  MatrixXd pts(3, 1);
  pts << 1, 2, 3;
  VectorXi y(3);
  y << 1, 1, 1;
  EXPECT_THROW(mg::fit_linear(pts, y), std::domain_error);
}

TEST(FitLinear, SeparableCloudPerfectAccuracy) {
  mg::Rng rng(83);
  const int n = 200;
  MatrixXd pts(n, 2);
  VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    pts(i, 0) = sign * (1.0 + 0.5 * mg::uniform01(rng));
    pts(i, 1) = mg::uniform01(rng) - 0.5;
    y[i] = static_cast<int>(sign);
  }
  const auto model = mg::fit_linear(pts, y, {500, 0.5, 1e-4, false});
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    correct += model.predict(pts.row(i).transpose()) == y[i];
  }
  EXPECT_EQ(correct, n);
}

TEST(FitLinear, BiasFitWhenRequested) {
  MatrixXd pts(4, 1);
  pts << 1.0, 2.0, 4.0, 5.0;  // separated at x = 3, not at the origin
  VectorXi y(4);
  y << -1, -1, 1, 1;
  const auto model = mg::fit_linear(pts, y, {2000, 0.5, 1e-6, true});
  int correct = 0;
  for (int i = 0; i < 4; ++i) {
    correct += model.predict(pts.row(i).transpose()) == y[i];
  }
  EXPECT_EQ(correct, 4);
  EXPECT_NE(model.b, 0.0);
}

TEST(MarginScores, Examples) {
  mg::LinearModel m;
  m.w = VectorXd(2);
  m.w << 1, 0;
  MatrixXd pts(2, 2);
  pts << 0.3, 0.9, 0.0, 1.0;
  const VectorXd f = mg::margin_scores(m, pts);
  EXPECT_DOUBLE_EQ(f[0], 0.3);
  EXPECT_DOUBLE_EQ(f[1], 0.0);

  mg::LinearModel shifted;
  shifted.w = VectorXd(2);
  shifted.w << 2, 0;
  shifted.b = -1.0;
  MatrixXd one(1, 2);
  one << 1, 0;
  EXPECT_DOUBLE_EQ(mg::margin_scores(shifted, one)[0], 1.0);
}

TEST(KMedoid, AllPointsZeroObjective) {
  MatrixXd pts = column({0.0, 1.0, 2.0});
  const auto sel = mg::k_medoid(pts, 3);
  EXPECT_EQ(sel.indices, (std::vector<int>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(sel.objective, 0.0);
}

TEST(KMedoid, TwoClusterExample) {
  MatrixXd pts = column({0.0, 0.1, 5.0, 5.1, 5.2});
  const auto sel = mg::k_medoid(pts, 2);
  EXPECT_NEAR(sel.objective, 0.3, 1e-12);
  // One medoid from {0.0, 0.1}, the other must be 5.1.
  EXPECT_TRUE(std::count(sel.indices.begin(), sel.indices.end(), 3) == 1);
  EXPECT_TRUE(sel.indices[0] == 0 || sel.indices[0] == 1);
}

TEST(KMedoid, SwapNeverWorseThanBuild) {
  mg::Rng rng(89);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixXd pts(40, 2);
    for (int i = 0; i < 40; ++i) {
      pts.row(i) = mg::gaussian_vector(2, rng).transpose();
    }
    const auto build_only = mg::k_medoid(pts, 4, 0, /*max_swap_passes=*/0);
    const auto full = mg::k_medoid(pts, 4, 0);
    EXPECT_LE(full.objective, build_only.objective + 1e-12);
  }
}

TEST(KMedoid, MatchesExhaustiveOnSmallInstances) {
  mg::Rng rng(97);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(mg::uniform01(rng) * 6);  // 5..10
    const int k = 1 + trial % 3;
    MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
      pts.row(i) = mg::gaussian_vector(2, rng).transpose();
    }
    const auto pam = mg::k_medoid(pts, k);
    const double best = exhaustive_kmedoid_cost(pts, k);
    EXPECT_NEAR(pam.objective, best, 1e-12) << "n=" << n << " k=" << k;
  }
}

TEST(KMedoid, DomainErrors) {
  MatrixXd pts = column({0.0, 1.0});
  EXPECT_THROW(mg::k_medoid(pts, 0), std::domain_error);
  EXPECT_THROW(mg::k_medoid(pts, 3), std::domain_error);
}

TEST(MmdCritic, SinglePrototypeMaximizesMeanSimilarity) {
  mg::Rng rng(101);
  MatrixXd pts(40, 2);
  for (int i = 0; i < 40; ++i) {
    VectorXd center(2);
    center << (i < 20 ? -2.0 : 2.0), 0.0;
    pts.row(i) = (center + 0.3 * mg::gaussian_vector(2, rng)).transpose();
  }
  const auto sel = mg::mmd_critic_prototypes(pts, 1);
  ASSERT_EQ(sel.indices.size(), 1u);

  // Brute-force the greedy criterion: k = 1 picks the point with the best
  // mean kernel similarity to the data.
  std::vector<double> dists;
  for (int i = 0; i < 40; ++i) {
    for (int j = i + 1; j < 40; ++j) {
      dists.push_back((pts.row(i) - pts.row(j)).norm());
    }
  }
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                   dists.end());
  const double h = dists[dists.size() / 2];
  int best = -1;
  double best_score = -1.0;
  for (int c = 0; c < 40; ++c) {
    double mean_sim = 0.0;
    for (int i = 0; i < 40; ++i) {
      mean_sim += std::exp(-(pts.row(c) - pts.row(i)).squaredNorm() /
                           (2.0 * h * h));
    }
    if (mean_sim > best_score) {
      best_score = mean_sim;
      best = c;
    }
  }
  EXPECT_EQ(sel.indices[0], best);
}

TEST(MmdCritic, GreedyObjectiveSequenceNonincreasing) {
  // Monotone regime: bandwidth well below the point spacing keeps the kernel
  // matrix diagonally dominant, where each added prototype lowers the MMD^2.
  mg::Rng rng(103);
  MatrixXd pts(30, 2);
  for (int i = 0; i < 30; ++i) {
    pts.row(i) = mg::gaussian_vector(2, rng).transpose();
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    const auto sel = mg::mmd_critic_prototypes(pts, k, 0.05);
    EXPECT_LE(sel.objective, prev + 1e-12) << "k=" << k;
    prev = sel.objective;
  }
}

TEST(MmdCritic, DuplicatePointsZeroObjective) {
  MatrixXd pts = MatrixXd::Ones(10, 2) * 0.7;
  for (int k : {1, 3}) {
    const auto sel = mg::mmd_critic_prototypes(pts, k);
    EXPECT_NEAR(sel.objective, 0.0, 1e-14);
  }
}

TEST(MmdCritic, RejectsDegenerateBandwidth) {
  MatrixXd pts = column({0.0, 1.0});
  EXPECT_THROW(mg::mmd_critic_prototypes(pts, 1, 0.0), std::domain_error);
  EXPECT_THROW(mg::mmd_critic_prototypes(pts, 1, -1.0), std::domain_error);
}

TEST(MarginFilter, IdentityAtZero) {
  const auto e = margins_only({0.4, -0.1, 0.7}, {1, -1, 1});
  const auto out = mg::margin_distance_filter(e, {0.0, true});
  EXPECT_EQ(out.size(), 3);
  EXPECT_EQ(out.margins[0], 0.4);
  EXPECT_EQ(out.margins[1], -0.1);
  EXPECT_EQ(out.margins[2], 0.7);
}

TEST(MarginFilter, FloorRuleExample) {
  // Positives {0.1, 0.5, 0.9} at l = 34: floor(1.02) = 1 removed (the 0.1).
  const auto e = margins_only({0.1, 0.5, 0.9}, {1, 1, 1});
  const auto out = mg::margin_distance_filter(e, {34.0, true});
  ASSERT_EQ(out.size(), 2);
  EXPECT_DOUBLE_EQ(out.margins[0], 0.5);
  EXPECT_DOUBLE_EQ(out.margins[1], 0.9);
}

TEST(MarginFilter, FullRemoval) {
  const auto e = margins_only({0.1, -0.5, 0.9, -0.2}, {1, -1, 1, -1});
  const auto out = mg::margin_distance_filter(e, {100.0, true});
  EXPECT_EQ(out.size(), 0);
}

TEST(MarginFilter, PerClassCountsExact) {
  mg::Rng rng(107);
  std::vector<double> margins;
  std::vector<int> labels;
  for (int i = 0; i < 37; ++i) {
    const int label = i % 3 == 0 ? -1 : 1;
    margins.push_back(label * mg::uniform01(rng));
    labels.push_back(label);
  }
  const auto e = margins_only(margins, labels);
  const long m_pos = std::count(labels.begin(), labels.end(), 1);
  const long m_neg = std::count(labels.begin(), labels.end(), -1);
  for (double l : {0.0, 10.0, 33.0, 50.0, 99.0, 100.0}) {
    const auto out = mg::margin_distance_filter(e, {l, true});
    const long keep_pos =
        (out.labels.array() == 1).count();
    const long keep_neg =
        (out.labels.array() == -1).count();
    EXPECT_EQ(m_pos - keep_pos, static_cast<long>(std::floor(l * m_pos / 100.0)));
    EXPECT_EQ(m_neg - keep_neg, static_cast<long>(std::floor(l * m_neg / 100.0)));
  }
}

TEST(MarginFilter, NestingAndOrderPreservation) {
  mg::Rng rng(109);
  std::vector<double> margins;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    const int label = mg::uniform01(rng) < 0.5 ? -1 : 1;
    margins.push_back(label * (0.01 + mg::uniform01(rng)));
    labels.push_back(label);
  }
  const auto e = margins_only(margins, labels);
  auto as_set = [](const mg::ExplanationSet& s) {
    std::set<double> out;
    for (Eigen::Index i = 0; i < s.size(); ++i) out.insert(s.points(i, 0));
    return out;
  };
  mg::ExplanationSet prev = mg::margin_distance_filter(e, {0.0, true});
  for (double l : {10.0, 25.0, 40.0, 60.0, 90.0}) {
    const auto cur = mg::margin_distance_filter(e, {l, true});
    const auto prev_ids = as_set(prev), cur_ids = as_set(cur);
    for (double id : cur_ids) {
      EXPECT_TRUE(prev_ids.count(id)) << "l=" << l;
    }
    // Original relative order is preserved (ids were written in order).
    for (Eigen::Index i = 1; i < cur.size(); ++i) {
      EXPECT_LT(cur.points(i - 1, 0), cur.points(i, 0));
    }
    prev = cur;
  }
}

TEST(MarginFilter, RetainedDominateRemoved) {
  mg::Rng rng(113);
  std::vector<double> margins;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    margins.push_back(label * mg::uniform01(rng));
    labels.push_back(label);
  }
  const auto e = margins_only(margins, labels);
  const auto out = mg::margin_distance_filter(e, {35.0, true});
  for (int label : {-1, 1}) {
    double min_kept = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (out.labels[i] == label) {
        min_kept = std::min(min_kept, std::fabs(out.margins[i]));
      }
    }
    std::set<double> kept_ids;
    for (Eigen::Index i = 0; i < out.size(); ++i) kept_ids.insert(out.points(i, 0));
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (e.labels[i] == label && !kept_ids.count(e.points(i, 0))) {
        EXPECT_LE(std::fabs(e.margins[i]), min_kept + 1e-15);
      }
    }
  }
}
