#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "functest/error.hpp"

namespace functest {

/// sup_x |F_N(x) - F(x)| for the empirical law of `values` against a continuous
/// distribution function. Ties are handled: the supremum also covers left limits.
template <class Cdf>
double ks_distance(std::vector<double> values, const Cdf& cdf) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "KS distance of an empty sample");
  std::sort(values.begin(), values.end());
  const double count = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / count - f, f - static_cast<double>(i) / count});
  }
  return d;
}

/// Asymptotic one-sample KS critical value c_level / sqrt(count) for levels
/// 0.10, 0.05 and 0.01.
inline double ks_critical_value(double level, std::size_t count) {
  double c = 0.0;
  if (level == 0.10) {
    c = 1.22;
  } else if (level == 0.05) {
    c = 1.36;
  } else if (level == 0.01) {
    c = 1.63;
  } else {
    fail(ErrorCode::InvalidArgument, "no KS critical value tabulated for level " + std::to_string(level));
  }
  return c / std::sqrt(static_cast<double>(count));
}

}  // namespace functest
