#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "functest/curves.hpp"
#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/lan.hpp"
#include "functest/parallel.hpp"
#include "functest/random.hpp"
#include "functest/testing.hpp"

namespace functest {

/// z_{0.975}, the multiplier of the 95% Wilson interval.
inline constexpr double kWilsonZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `successes` out of `trials`.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kWilsonZ95) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "Wilson interval of zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

struct MCReport {
  double t = 0.0;
  double theta = 0.0;
  std::size_t replicates = 0;
  std::size_t n = 0;
  std::size_t rejections = 0;
  double empirical_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double theoretical_power = 0.0;
  std::uint64_t master_seed = 0;

  bool ci_contains(double p) const { return ci_low <= p && p <= ci_high; }
};

struct PowerSweep {
  std::vector<double> grid;
  std::vector<MCReport> rows;
};

/// Monte Carlo estimate of the rejection probability of the score test along
/// P_{t/sqrt n}^n. Replicate r uses seed derive_seed(master_seed, r), so the result
/// does not depend on the worker count. theta comes from local_shift, never from
/// the simulation.
template <class M>
MCReport rejection_rate(const LocalCurve<M>& curve, const CanonicalGradient<M>& grad, const TestConfig& config,
                        double t, std::size_t n, std::size_t replicates, std::uint64_t master_seed,
                        std::size_t workers = worker_count()) {
  config.validate();
  if (replicates < kMinReplicates) fail(ErrorCode::InvalidArgument, "at least 100 replicates are required");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  const auto measure = measure_at(curve, t / std::sqrt(static_cast<double>(n)));
  std::vector<unsigned char> reject(replicates, 0);
  parallel_for(
      replicates,
      [&](std::size_t r) {
        const auto sample = draw(measure, n, derive_seed(master_seed, r));
        reject[r] = run_test(sample, grad, config).reject ? 1 : 0;
      },
      workers);

  MCReport out;
  out.t = t;
  out.theta = local_shift(curve, t, grad);
  out.replicates = replicates;
  out.n = n;
  out.master_seed = master_seed;
  for (unsigned char r : reject) out.rejections += r;
  out.empirical_rate = static_cast<double>(out.rejections) / static_cast<double>(replicates);
  const auto ci = wilson_interval(out.rejections, replicates);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  out.theoretical_power = asymptotic_power(out.theta, grad.norm(), config);
  return out;
}

/// One rejection_rate row per t of a strictly increasing grid, all sharing the
/// master seed.
template <class M>
PowerSweep power_sweep(const LocalCurve<M>& curve, const CanonicalGradient<M>& grad, const TestConfig& config,
                       std::span<const double> t_grid, std::size_t n, std::size_t replicates,
                       std::uint64_t master_seed, std::size_t workers = worker_count()) {
  if (t_grid.empty()) fail(ErrorCode::InvalidArgument, "empty t grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) fail(ErrorCode::InvalidArgument, "t grid must be strictly increasing");
  }
  PowerSweep out;
  out.grid.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) {
    out.rows.push_back(rejection_rate(curve, grad, config, t, n, replicates, master_seed, workers));
  }
  return out;
}

}  // namespace functest
