#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>

#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/measures.hpp"
#include "functest/normal.hpp"

namespace functest {

enum class Sidedness { one_sided, two_sided };
enum class NormSource { exact, plug_in };

inline const char* to_string(Sidedness s) { return s == Sidedness::one_sided ? "one_sided" : "two_sided"; }
inline const char* to_string(NormSource s) { return s == NormSource::exact ? "exact" : "plug_in"; }

struct TestConfig {
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::one_sided;
  NormSource norm_source = NormSource::exact;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  }

  /// u_{1-alpha} (one-sided) or u_{1-alpha/2} (two-sided).
  double normal_critical() const {
    return sidedness == Sidedness::one_sided ? normal_quantile(1.0 - alpha) : normal_quantile(1.0 - alpha / 2.0);
  }
};

struct TestOutcome {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  double p_value = 1.0;
  std::size_t n = 0;
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::one_sided;
  double norm = 0.0;
};

/// T_n = n^{-1/2} sum_i k(X_i).
template <class Point, class M>
double test_statistic(const Sample<Point>& sample, const CanonicalGradient<M>& grad) {
  static_assert(std::is_same_v<Point, typename M::point_type>, "sample and gradient live on different spaces");
  if (sample.values.empty()) fail(ErrorCode::InvalidArgument, "empty sample");
  double sum = 0.0;
  for (const auto& x : sample.values) sum += grad.evaluate(x);
  return sum / std::sqrt(static_cast<double>(sample.size()));
}

/// Standard deviation of k(X_i) around its sample mean, denominator n.
template <class Point, class M>
double plug_in_norm(const Sample<Point>& sample, const CanonicalGradient<M>& grad) {
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (const auto& x : sample.values) mean += grad.evaluate(x);
  mean /= n;
  double ss = 0.0;
  for (const auto& x : sample.values) {
    const double d = grad.evaluate(x) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / n);
}

/// Decision of the score test for an already computed statistic. Rejection is
/// strict: T_n (or |T_n|) must exceed the critical value.
inline TestOutcome decide(double statistic, double norm, std::size_t n, const TestConfig& config) {
  config.validate();
  if (!(norm > 0.0)) fail(ErrorCode::InvalidArgument, "gradient norm must be positive");
  TestOutcome out;
  out.statistic = statistic;
  out.n = n;
  out.alpha = config.alpha;
  out.sidedness = config.sidedness;
  out.norm = norm;
  out.critical_value = config.normal_critical() * norm;
  if (config.sidedness == Sidedness::one_sided) {
    out.reject = statistic > out.critical_value;
    out.p_value = normal_cdf(-statistic / norm);
  } else {
    out.reject = std::abs(statistic) > out.critical_value;
    out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(statistic) / norm));
  }
  // Rounding at the boundary must not make p_value disagree with the decision.
  if (out.reject && !(out.p_value < config.alpha)) {
    out.p_value = std::nextafter(config.alpha, 0.0);
  } else if (!out.reject && out.p_value < config.alpha) {
    out.p_value = config.alpha;
  }
  return out;
}

template <class Point, class M>
TestOutcome run_test(const Sample<Point>& sample, const CanonicalGradient<M>& grad, const TestConfig& config) {
  config.validate();
  double norm = grad.norm();
  if (config.norm_source == NormSource::plug_in) {
    norm = plug_in_norm(sample, grad);
    if (!(norm * norm > kDegenerateNormSq)) {
      fail(ErrorCode::ZeroNormEstimate, "plug-in variance of the gradient scores vanishes");
    }
  }
  return decide(test_statistic(sample, grad), norm, sample.size(), config);
}

/// Limit power along a local sequence with local parameter theta:
/// one-sided Phi(theta/|k| - u_{1-a}); two-sided Phi(theta/|k| - u_{1-a/2}) + Phi(-theta/|k| - u_{1-a/2}).
inline double asymptotic_power(double theta, double norm, const TestConfig& config) {
  config.validate();
  if (!(norm > 0.0)) fail(ErrorCode::InvalidArgument, "gradient norm must be positive");
  const double shift = theta / norm;
  const double u = config.normal_critical();
  if (config.sidedness == Sidedness::one_sided) return normal_cdf(shift - u);
  return normal_cdf(shift - u) + normal_cdf(-shift - u);
}

}  // namespace functest
