#pragma once

#include <cmath>
#include <limits>

#include "eods/errors.hpp"

namespace eods {

// Bracketed root finder: regula falsi steps, with a bisection step whenever
// the previous step failed to halve the bracket. Returns once the bracket
// width is at most xtol (or the endpoints are adjacent doubles).
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double xtol, int max_iter = 500) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi))
    throw DomainError("solve_bracketed: root is not bracketed");

  bool bisect = false;
  for (int it = 0; it < max_iter; ++it) {
    const double width = hi - lo;
    if (width <= xtol || std::nextafter(lo, hi) == hi) break;
    double x = hi - fhi * (hi - lo) / (fhi - flo);
    if (bisect || !(x > lo && x < hi)) x = lo + 0.5 * width;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    bisect = (hi - lo) > 0.5 * width;
  }
  // final secant polish inside the bracket
  const double x = hi - fhi * (hi - lo) / (fhi - flo);
  return (x >= lo && x <= hi) ? x : lo + 0.5 * (hi - lo);
}

}  // namespace eods
