#pragma once

#include <algorithm>
#include <cmath>

#include "brownmeasure/error.hpp"

namespace brown {

struct RootOptions {
  /// Converged once the bracket is narrower than rel_tol * max(abs_floor, |x|).
  double rel_tol = 1e-14;
  double abs_floor = 1.0;
  int max_iter = 200;
};

struct RootResult {
  double root = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

/// Root of a continuous function with a sign change on [lo, hi].
///
/// Regula falsi with the Illinois down-weighting of a stagnant endpoint; a
/// bisection step is forced whenever the secant candidate leaves the interior
/// or the bracket has not halved over the last two steps. The caller passes
/// the endpoint values so that limits (e.g. at a pole) can be supplied exactly.
template <class F>
RootResult find_root_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi, const RootOptions& opt = {}) {
  if (f_lo == 0.0) return {lo, lo, lo, 0};
  if (f_hi == 0.0) return {hi, hi, hi, 0};
  if ((f_lo < 0.0) == (f_hi < 0.0)) throw NumericalFailure("root is not bracketed", lo, hi);

  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  int side = 0;  // which endpoint was retained last: -1 = a, +1 = b
  double width_before = std::abs(b - a);
  double width_prev = width_before;

  for (int it = 1; it <= opt.max_iter; ++it) {
    const double width = std::abs(b - a);
    const double mid = 0.5 * (a + b);
    const double scale = std::max(opt.abs_floor, std::max(std::abs(a), std::abs(b)));
    if (width <= opt.rel_tol * scale || mid == a || mid == b) {
      return {std::abs(fa) < std::abs(fb) ? a : b, std::min(a, b), std::max(a, b), it - 1};
    }

    double x = b - fb * (b - a) / (fb - fa);
    const bool stalled = width > 0.5 * width_before;
    if (!(x > std::min(a, b) && x < std::max(a, b)) || stalled) {
      x = mid;
      side = 0;
    }
    width_before = width_prev;
    width_prev = width;

    const double fx = f(x);
    if (fx == 0.0) return {x, x, x, it};
    if ((fx < 0.0) == (fa < 0.0)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == +1) fa *= 0.5;
      side = +1;
    }
  }
  throw NumericalFailure("root finder did not converge", std::min(a, b), std::max(a, b));
}

}  // namespace brown
