#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>

#include "sybil/error.hpp"

namespace sybil::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BisectionOptions {
  int max_iterations = 200;
  double residual = 1e-12;
};

struct Root {
  double x;
  double fx;
  int iterations;
};

/// Bisection on [lo, hi]. Requires f(lo) and f(hi) of opposite sign (or zero).
template <typename F>
Root bisect(F&& f, double lo, double hi, BisectionOptions opts = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, flo, 0};
  if (fhi == 0.0) return {hi, fhi, 0};
  if ((flo < 0.0) == (fhi < 0.0)) {
    std::ostringstream msg;
    msg << "bisect: no sign change on [" << lo << ", " << hi << "] (f = " << flo << ", " << fhi
        << ")";
    throw NumericFailure(msg.str());
  }
  double mid = 0.5 * (lo + hi);
  double fmid = f(mid);
  int it = 1;
  for (; it < opts.max_iterations; ++it) {
    if (std::abs(fmid) < opts.residual) break;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    double next = 0.5 * (lo + hi);
    if (next == lo || next == hi) break; // interval exhausted at double resolution
    mid = next;
    fmid = f(mid);
  }
  return {mid, fmid, it};
}

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 40) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol, max_depth);
  double fa = f(a);
  double fb = f(b);
  double m = 0.5 * (a + b);
  double fm = f(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

/// Uniform grid over [lower, upper] followed by local refinement rounds: each round re-grids
/// [best - step, best + step] with step / 10.
struct GridSearch {
  double lower = 0.0;
  double upper = 1.0;
  double step = 1e-3;
  int refine_rounds = 3;
};

struct Maximum {
  double x;
  double value;
};

inline std::size_t grid_points(double lower, double upper, double step) {
  if (!(step > 0.0) || !std::isfinite(upper) || !std::isfinite(lower) || upper < lower) {
    throw ConfigError("grid search needs a finite range and a positive step");
  }
  double count = std::floor((upper - lower) / step + 1e-9);
  if (count > 5e8) throw ConfigError("grid search range/step too large");
  return static_cast<std::size_t>(count) + 1;
}

/// Maximizes f over the grid; ties go to the smaller argument.
template <typename F>
Maximum grid_maximize(F&& f, const GridSearch& search) {
  std::size_t count = grid_points(search.lower, search.upper, search.step);
  Maximum best{search.lower, -kInf};
  for (std::size_t i = 0; i < count; ++i) {
    double x = std::min(search.upper, search.lower + static_cast<double>(i) * search.step);
    double v = f(x);
    if (v > best.value) best = {x, v};
  }
  // the grid may stop short of upper
  if (double v = f(search.upper); v > best.value) best = {search.upper, v};

  double step = search.step;
  for (int round = 0; round < search.refine_rounds; ++round) {
    double lo = std::max(search.lower, best.x - step);
    double hi = std::min(search.upper, best.x + step);
    step /= 10.0;
    for (int i = 0; i <= 20; ++i) {
      double x = std::min(hi, lo + i * step);
      double v = f(x);
      if (v > best.value) best = {x, v};
    }
  }
  return best;
}

/// Central finite difference.
template <typename F>
double central_difference(F&& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace sybil::numeric
