/**
 * @file quadrature.hpp
 * @brief Adaptive Gauss-Kronrod integration over intervals with optional breakpoints.
 */
#pragma once

#include <algorithm>
#include <queue>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "roughfilm/errors.hpp"
#include "roughfilm/format.hpp"

namespace roughfilm {

inline constexpr int kMaxQuadratureSplits = 4000;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Integrates f over [a, b] with an absolute error target. Interior breakpoints
/// (kinks of a spline or a piecewise-linear table) split the range so that each
/// piece is smooth. Throws QuadratureFailure when the estimate misses abs_tol.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12,
                                    std::span<const double> breakpoints = {}) {
  QuadratureResult out;
  if (a == b) return out;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);

  std::vector<double> cuts{lo};
  for (double x : breakpoints)
    if (x > lo && x < hi) cuts.push_back(x);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Global adaptive bisection on the Kronrod-minus-Gauss estimate: the
  // interval with the largest estimate is split until the total meets abs_tol.
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto eval = [&](double x0, double x1) {
    double err = 0.0;
    const double v = Rule::integrate(f, x0, x1, 0, 0.0, &err);
    return Piece{x0, x1, v, err};
  };
  std::priority_queue<Piece> queue;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) queue.push(eval(cuts[i], cuts[i + 1]));
  auto total_error = [&] {
    double e = 0.0;
    for (auto copy = queue; !copy.empty(); copy.pop()) e += copy.top().error;
    return e;
  };
  double err_sum = total_error();
  for (int split = 0; err_sum > abs_tol && split < kMaxQuadratureSplits; ++split) {
    const Piece worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    queue.pop();
    const Piece left = eval(worst.a, mid), right = eval(mid, worst.b);
    err_sum += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    if (split % 64 == 63) err_sum = total_error();
  }
  for (; !queue.empty(); queue.pop()) {
    out.value += queue.top().value;
    out.error_estimate += queue.top().error;
  }
  if (!std::isfinite(out.value))
    throw Error(ErrorCode::QuadratureFailure, "integrand produced a non-finite value");
  if (out.error_estimate > abs_tol)
    throw Error(ErrorCode::QuadratureFailure,
                "error estimate " + format_shortest(out.error_estimate) + " exceeds tolerance " +
                    format_shortest(abs_tol));
  out.value *= sign;
  return out;
}

template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                 std::span<const double> breakpoints = {}) {
  return integrate_adaptive(std::forward<F>(f), a, b, abs_tol, breakpoints).value;
}

}  // namespace roughfilm
