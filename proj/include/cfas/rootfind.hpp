#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cfas/errors.hpp"

namespace cfas {

struct RootResult {
  double x = 0.0;
  int iterations = 0;
};

/// Bracketed root of a continuous f on [lo, hi].
///
/// Illinois-weighted false position with a bisection step whenever the
/// bracket fails to halve over two iterations. Stops when |f| <= f_tol or the
/// bracket is narrower than x_tol * max(1, |x|). Throws ConvergenceError if
/// f(lo) and f(hi) do not straddle zero.
template <class F>
RootResult find_root(F&& f, double lo, double hi, double f_tol, double x_tol = 1e-15, int max_iter = 1000) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0};
  if (f_hi == 0.0) return {hi, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi) || std::isnan(f_lo) || std::isnan(f_hi))
    throw ConvergenceError("root not bracketed on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

  int side = 0;  // which endpoint was retained last time (-1 lo, +1 hi)
  double width = hi - lo;
  for (int it = 1; it <= max_iter; ++it) {
    double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi) || (it % 3 == 0 && (hi - lo) > 0.5 * width)) {
      x = 0.5 * (lo + hi);
      width = hi - lo;
    }
    const double fx = f(x);
    if (std::abs(fx) <= f_tol || hi - lo <= x_tol * std::max(1.0, std::abs(x))) return {x, it};
    if (std::signbit(fx) == std::signbit(f_lo)) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  throw ConvergenceError("root finder exceeded " + std::to_string(max_iter) + " iterations");
}

}  // namespace cfas
