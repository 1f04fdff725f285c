#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace margin_guard {
namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b,
                            double fb, double m, double fm, double whole,
                            double tol, std::int64_t& budget, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  budget -= 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // 15 = Richardson factor for Simpson's rule.
  if (depth <= 0 || budget <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              budget, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              budget, depth - 1);
}

}  // namespace detail

// Adaptive composite Simpson on [a, b] with absolute tolerance `abs_tol`.
// Refinement stops once the evaluation budget is spent; the estimate so far
// is returned in that case.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-9,
                        std::int64_t max_evals = std::int64_t{1} << 20) {
  if (!(b >= a)) throw std::domain_error("adaptive_simpson: requires b >= a");
  if (a == b) return 0.0;
  std::int64_t budget = max_evals - 3;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol,
                                      budget, 48);
}

}  // namespace margin_guard
