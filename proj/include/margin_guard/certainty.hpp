#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "margin_guard/boundary.hpp"
#include "margin_guard/linear_model.hpp"
#include "margin_guard/parallel.hpp"

// Monte-Carlo estimation of the misreporting gain pi(x, x') from version-space
// samples, the three summary metrics, and sample-size planning from the dual
// VC dimension.

namespace margin_guard {

struct PiEstimate {
  double pi_hat = 0.0;
  double std_error = 0.0;
};

// pi_hat = frac(h(x') = +1) - frac(h(x) = +1); signed, not clamped.
// The reported error is the conservative sum of the two binomial terms.
inline PiEstimate estimate_pi(const std::vector<LinearModel>& samples,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& x_prime) {
  if (samples.empty()) throw std::domain_error("estimate_pi: no samples");
  const double n = static_cast<double>(samples.size());
  long long cnt_x = 0, cnt_xp = 0;
  for (const auto& h : samples) {
    cnt_x += h.predict(x) == +1;
    cnt_xp += h.predict(x_prime) == +1;
  }
  const double p1 = cnt_xp / n;
  const double p2 = cnt_x / n;
  PiEstimate e;
  e.pi_hat = (cnt_xp - cnt_x) / n;
  e.std_error = std::sqrt(p1 * (1.0 - p1) / n) + std::sqrt(p2 * (1.0 - p2) / n);
  return e;
}

struct PairCertainty {
  int pair_index = 0;
  double pi_hat = 0.0;
};

struct CertaintyReport {
  std::vector<PairCertainty> per_pair;
  double max_pi = 0.0;
  double top5_mean = 0.0;  // mean of the ceil(0.05 m) largest values
  double mean_pi = 0.0;
  long long n_samples = 0;
  double stderr_bound = 0.0;  // worst per-pair standard error
};

// Full report over a pair set. Prediction indicators are computed once per
// referenced point, not per pair, so pairs sharing endpoints cost nothing
// extra. Returns nullopt when the pair set is empty (no gaming possible at
// this radius).
inline std::optional<CertaintyReport> certainty_metrics(
    const std::vector<LinearModel>& samples, const Eigen::MatrixXd& points,
    const BoundaryPairSet& pairs) {
  if (samples.empty()) throw std::domain_error("certainty_metrics: no samples");
  if (pairs.empty()) return std::nullopt;

  // Collect the points actually referenced by pairs.
  std::unordered_map<int, int> slot;
  std::vector<int> used;
  for (const auto& [i, j] : pairs.pairs) {
    for (int p : {i, j}) {
      if (slot.emplace(p, static_cast<int>(used.size())).second) {
        used.push_back(p);
      }
    }
  }
  Eigen::MatrixXd sub(used.size(), points.cols());
  for (std::size_t k = 0; k < used.size(); ++k) sub.row(k) = points.row(used[k]);

  // positive_counts[k] = number of sampled models labeling point k as +1.
  const long n = static_cast<long>(samples.size());
  std::vector<std::vector<long long>> partial;
  std::vector<long long> positive_counts(used.size(), 0);
  {
    const int chunks = std::max(1, max_threads());
    partial.assign(chunks, std::vector<long long>(used.size(), 0));
    parallel_chunks(n, [&](long begin, long end, int chunk) {
      auto& acc = partial[static_cast<std::size_t>(chunk) % partial.size()];
      for (long s = begin; s < end; ++s) {
        const Eigen::VectorXd f =
            (sub * samples[s].w).array() + samples[s].b;
        for (std::size_t k = 0; k < acc.size(); ++k) {
          acc[k] += f[static_cast<Eigen::Index>(k)] >= 0.0;
        }
      }
    });
    for (const auto& acc : partial) {
      for (std::size_t k = 0; k < positive_counts.size(); ++k) {
        positive_counts[k] += acc[k];
      }
    }
  }

  CertaintyReport rep;
  rep.n_samples = n;
  rep.per_pair.reserve(pairs.size());
  const double dn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t idx = 0; idx < pairs.pairs.size(); ++idx) {
    const auto [i, j] = pairs.pairs[idx];
    const long long ci = positive_counts[slot[i]];
    const long long cj = positive_counts[slot[j]];
    const double pi_hat = static_cast<double>(cj - ci) / dn;
    rep.per_pair.push_back({static_cast<int>(idx), pi_hat});
    sum += pi_hat;
    const double p1 = cj / dn, p2 = ci / dn;
    rep.stderr_bound =
        std::max(rep.stderr_bound, std::sqrt(p1 * (1.0 - p1) / dn) +
                                       std::sqrt(p2 * (1.0 - p2) / dn));
  }
  const std::size_t m = rep.per_pair.size();
  rep.mean_pi = sum / static_cast<double>(m);

  // Top-5% by count, at least one value; ties broken by larger pair index.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&rep](int a, int b) {
    if (rep.per_pair[a].pi_hat != rep.per_pair[b].pi_hat) {
      return rep.per_pair[a].pi_hat > rep.per_pair[b].pi_hat;
    }
    return a > b;
  });
  const std::size_t top_k = static_cast<std::size_t>(
      std::ceil(0.05 * static_cast<double>(m)));
  double top_sum = 0.0;
  for (std::size_t k = 0; k < top_k; ++k) {
    top_sum += rep.per_pair[order[k]].pi_hat;
  }
  rep.top5_mean = top_sum / static_cast<double>(top_k);
  rep.max_pi = rep.per_pair[order[0]].pi_hat;
  return rep;
}

// Sample size for uniform 2-epsilon accuracy of the positive-rate estimates
// (hence 4-epsilon accuracy of the certainty maximum):
// ceil(C (vc_dual + ln(1/delta)) / epsilon^2), C = 8 by default.
inline long long required_samples(double epsilon, double delta,
                                  long long vc_dual, double constant = 8.0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("required_samples: epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("required_samples: delta must lie in (0, 1)");
  }
  if (vc_dual < 1) throw std::domain_error("required_samples: vc_dual < 1");
  const double raw = constant *
                     (static_cast<double>(vc_dual) + std::log(1.0 / delta)) /
                     (epsilon * epsilon);
  return static_cast<long long>(std::ceil(raw));
}

}  // namespace margin_guard
