#pragma once

#include <cmath>
#include <string>

#include "functest/error.hpp"

namespace functest {

/// Standard normal distribution function, via erfc so both tails keep full
/// relative precision.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal quantile u_p. Bisection on normal_cdf until the bracket
/// collapses to adjacent doubles; the lower tail is solved and mirrored.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::QuantileDomain, "p=" + std::to_string(p) + " not in (0,1)");
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double lo = -40.0;
  double hi = 0.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (normal_cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = std::abs(normal_cdf(lo) - target) < std::abs(normal_cdf(hi) - target) ? lo : hi;
  return upper ? -root : root;
}

}  // namespace functest
