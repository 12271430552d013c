#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "functest/error.hpp"

namespace functest {

inline constexpr double kQuadratureTolerance = 1e-9;
inline constexpr int kQuadratureMaxDepth = 40;

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth >= kQuadratureMaxDepth) {
    fail(ErrorCode::QuadratureNonConvergence,
         "adaptive Simpson reached depth " + std::to_string(depth) + " near x=" + std::to_string(m));
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson integral of f over [a, b]. The interval is first cut at the
/// given breakpoints (jump locations of f) and into 8 equal panels per piece so
/// that symmetric integrands cannot fake early convergence.
template <class F>
double integrate(const F& f, double a, double b, std::span<const double> breakpoints = {},
                 double tol = kQuadratureTolerance) {
  if (!(a < b)) return 0.0;
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  constexpr int kPanels = 8;
  const double panel_tol = tol / (static_cast<double>(cuts.size() - 1) * kPanels);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double width = (cuts[i + 1] - cuts[i]) / kPanels;
    for (int k = 0; k < kPanels; ++k) {
      const double lo = cuts[i] + k * width;
      const double hi = k + 1 == kPanels ? cuts[i + 1] : lo + width;
      const double mid = 0.5 * (lo + hi);
      // Piece ends are evaluated as one-sided limits so a jump at a breakpoint
      // does not leak into the neighbouring piece.
      const double flo = k == 0 ? f(std::nextafter(lo, hi)) : f(lo);
      const double fhi = k + 1 == kPanels ? f(std::nextafter(hi, lo)) : f(hi);
      const double fmid = f(mid);
      const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
      total += detail::simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, panel_tol, 0);
    }
  }
  return total;
}

}  // namespace functest
