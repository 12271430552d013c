#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "functest/curves.hpp"
#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/ks.hpp"
#include "functest/measures.hpp"
#include "functest/normal.hpp"
#include "functest/parallel.hpp"
#include "functest/random.hpp"
#include "functest/testing.hpp"

namespace functest {

inline constexpr std::size_t kMinReplicates = 100;

/// log dP_{n,g}/dP_{n,0} = sum_i log[c(g/sqrt n)^{-1} (1 + g(X_i)/(2 sqrt n))^2] for
/// the curve's effective tangent g. Returns -infinity when an observation sits on
/// a zero of the perturbed density.
template <class Point, class M>
double log_likelihood_ratio(const Sample<Point>& sample, const LocalCurve<M>& curve, std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  const double s = curve.step(1.0 / std::sqrt(static_cast<double>(n)));
  const double log_c = std::log(normalizer(curve, 1.0 / std::sqrt(static_cast<double>(n))));
  const auto& g = curve.direction().evaluate;
  double acc = 0.0;
  for (const auto& x : sample.values) {
    const double root = 1.0 + s * g(x) / 2.0;
    if (root == 0.0) return -std::numeric_limits<double>::infinity();
    acc += 2.0 * std::log(std::abs(root)) - log_c;
  }
  return acc;
}

/// R_{n,g} = logLR - [n^{-1/2} sum_i g(X_i) - (1/2) integral g^2 dP0].
template <class Point, class M>
double lan_remainder(const Sample<Point>& sample, const LocalCurve<M>& curve, std::size_t n) {
  if (sample.size() != n) fail(ErrorCode::InvalidArgument, "sample size differs from n");
  const double loglr = log_likelihood_ratio(sample, curve, n);
  if (std::isinf(loglr)) return loglr;
  const auto& g = curve.direction().evaluate;
  double sum = 0.0;
  for (const auto& x : sample.values) sum += g(x);
  const double central = curve.scale() * sum / std::sqrt(static_cast<double>(n));
  const double half_norm_sq = 0.5 * curve.scale() * curve.scale() * curve.direction().norm_sq;
  return loglr - (central - half_norm_sq);
}

/// Linear-interpolation quantile of already sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};

/// Mean and variance (denominator N) in index order.
inline MeanVar mean_var(const std::vector<double>& v) {
  MeanVar out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  for (double x : v) out.var += (x - out.mean) * (x - out.mean);
  out.var /= static_cast<double>(v.size());
  return out;
}

/// Behaviour of the log-likelihood ratio under P0^n.
struct LanStats {
  std::size_t n = 0;
  std::size_t replicates = 0;
  double loglr_mean = 0.0;
  double loglr_var = 0.0;
  /// Mean and Monte Carlo standard error of exp(logLR); likelihood ratios integrate to one.
  double lr_mean = 0.0;
  double lr_mean_se = 0.0;
  double remainder_median = 0.0;
  double remainder_p90 = 0.0;
  /// Replicates whose logLR is -infinity; excluded from the moments above.
  std::size_t degenerate_replicates = 0;
};

inline constexpr std::uint64_t kLanStream = 0x4C414E5354524D31ULL;

template <class M>
LanStats lan_diagnostics(const LocalCurve<M>& curve, std::size_t n, std::size_t replicates, std::uint64_t seed,
                         std::size_t workers = worker_count()) {
  if (replicates < kMinReplicates) fail(ErrorCode::InvalidArgument, "at least 100 replicates are required");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  const std::uint64_t master = derive_seed(seed, kLanStream);
  std::vector<double> loglr(replicates);
  std::vector<double> remainder(replicates);
  parallel_for(
      replicates,
      [&](std::size_t r) {
        const auto sample = draw(curve.base(), n, derive_seed(master, r));
        loglr[r] = log_likelihood_ratio(sample, curve, n);
        remainder[r] = lan_remainder(sample, curve, n);
      },
      workers);

  LanStats out;
  out.n = n;
  out.replicates = replicates;
  std::vector<double> finite_loglr;
  std::vector<double> lr;
  std::vector<double> abs_remainder;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (std::isinf(loglr[r])) {
      ++out.degenerate_replicates;
      continue;
    }
    finite_loglr.push_back(loglr[r]);
    lr.push_back(std::exp(loglr[r]));
    abs_remainder.push_back(std::abs(remainder[r]));
  }
  const auto ll = mean_var(finite_loglr);
  out.loglr_mean = ll.mean;
  out.loglr_var = ll.var;
  const auto lrm = mean_var(lr);
  out.lr_mean = lrm.mean;
  out.lr_mean_se = lr.empty() ? 0.0 : std::sqrt(lrm.var / static_cast<double>(lr.size()));
  std::sort(abs_remainder.begin(), abs_remainder.end());
  out.remainder_median = sorted_quantile(abs_remainder, 0.5);
  out.remainder_p90 = sorted_quantile(abs_remainder, 0.9);
  return out;
}

struct LanReport {
  std::size_t n = 0;
  double t = 0.0;
  double theta = 0.0;
  double norm = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  /// Empirical law of T_n under P_{t/sqrt n}^n.
  double statistic_mean = 0.0;
  double statistic_var = 0.0;
  /// KS distance of (T_n - theta)/|k| to the standard normal.
  double ks_to_limit = 0.0;
  double ks_level = 0.01;
  double ks_critical = 0.0;
  /// logLR and remainder for the tangent t*g under P0^n.
  LanStats lan;

  bool ks_passes() const { return ks_to_limit <= ks_critical; }
};

/// Draws `replicates` samples of size n from P_{t/sqrt n}, computes T_n for each and
/// compares (T_n - theta)/|k| to N(0,1); also runs the LAN diagnostics for the
/// tangent t*g under P0.
template <class M>
LanReport third_lemma_check(const LocalCurve<M>& curve, const CanonicalGradient<M>& grad, double t, std::size_t n,
                            std::size_t replicates, std::uint64_t seed, double ks_level = 0.01,
                            std::size_t workers = worker_count()) {
  if (replicates < kMinReplicates) fail(ErrorCode::InvalidArgument, "at least 100 replicates are required");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  LanReport out;
  out.n = n;
  out.t = t;
  out.replicates = replicates;
  out.seed = seed;
  out.theta = local_shift(curve, t, grad);
  out.norm = grad.norm();
  out.ks_level = ks_level;
  out.ks_critical = ks_critical_value(ks_level, replicates);

  const auto alternative = measure_at(curve, t / std::sqrt(static_cast<double>(n)));
  std::vector<double> stats(replicates);
  parallel_for(
      replicates,
      [&](std::size_t r) { stats[r] = test_statistic(draw(alternative, n, derive_seed(seed, r)), grad); },
      workers);
  const auto mv = mean_var(stats);
  out.statistic_mean = mv.mean;
  out.statistic_var = mv.var;
  std::vector<double> standardized(replicates);
  for (std::size_t r = 0; r < replicates; ++r) standardized[r] = (stats[r] - out.theta) / out.norm;
  out.ks_to_limit = ks_distance(std::move(standardized), normal_cdf);
  out.lan = lan_diagnostics(scaled_curve(curve, t), n, replicates, seed, workers);
  return out;
}

}  // namespace functest
