#pragma once

// Reference computations used only by the test suites. Each routine takes a
// different path from the library code it checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace oracle {

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Total variation of the n-fold products by recursion over coordinates.
inline double product_tv(const std::vector<double>& p, const std::vector<double>& q, std::size_t n) {
  std::function<double(std::size_t, double, double)> rec = [&](std::size_t depth, double a, double b) {
    if (depth == n) return std::abs(a - b);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += rec(depth + 1, a * p[i], b * q[i]);
    return acc;
  };
  return 0.5 * rec(0, 1.0, 1.0);
}

/// Central finite-difference gradient of f at x.
inline std::vector<double> gradient(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> x, double h = 1e-6) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

/// Composite midpoint rule with many panels; slow but assumption-free.
inline double midpoint(const std::function<double(double)>& f, double a, double b, std::size_t panels = 200000) {
  const double h = (b - a) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t i = 0; i < panels; ++i) acc += f(a + (static_cast<double>(i) + 0.5) * h);
  return acc * h;
}

}  // namespace oracle
