#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "functest/mc.hpp"
#include "functest/random.hpp"

namespace functest {
namespace {

LocalCurve<FiniteMeasure> canonical_curve() {
  return LocalCurve<FiniteMeasure>(make_tangent(uniform_finite(3), AtomFunction{{1, -1, 0}}));
}

CanonicalGradient<FiniteMeasure> canonical_grad() {
  return von_mises_gradient(uniform_finite(3), AtomFunction{{1, 0, 0}});
}

TestConfig config(Sidedness s) {
  TestConfig c;
  c.sidedness = s;
  return c;
}

// Wilson bounds solve |phat - p| = z sqrt(p(1-p)/n); found here by bisection.
double wilson_root(double phat, double n, double z, bool upper) {
  auto gap = [&](double p) { return std::abs(phat - p) - z * std::sqrt(p * (1.0 - p) / n); };
  double lo = upper ? phat : 0.0;
  double hi = upper ? 1.0 : phat;
  if (gap(upper ? hi : lo) <= 0.0) return upper ? 1.0 : 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool outside = gap(mid) > 0.0;
    if (upper == outside) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TEST(Seeds, DeterministicAndDistinct) {
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  std::mt19937_64 rng(123);
  std::size_t collisions = 0;
  for (int i = 0; i < 1000000; ++i) {
    const auto m = rng();
    if (derive_seed(m, 0) == derive_seed(m, 1)) ++collisions;
  }
  EXPECT_EQ(collisions, 0u);
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 100000; ++r) seen.insert(derive_seed(9, r));
  EXPECT_EQ(seen.size(), 100000u);
}

TEST(Seeds, DerivedStreamsAreUniform) {
  const double crit = boost::math::quantile(boost::math::chi_squared_distribution<double>(255), 0.999);
  for (std::uint64_t index : {0u, 1u, 1000u}) {
    UniformStream s(derive_seed(2024, index));
    std::vector<double> counts(256, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const double u = s.next();
      ASSERT_GT(u, 0.0);
      ASSERT_LT(u, 1.0);
      counts[static_cast<std::size_t>(u * 256.0)] += 1.0;
    }
    const double expected = draws / 256.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, crit);
  }
}

TEST(Wilson, MatchesQuadraticRoots) {
  for (std::size_t n : {10u, 100u, 10000u}) {
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, n / 20, n / 2, n - 1, n}) {
      const auto ci = wilson_interval(k, n);
      const double phat = static_cast<double>(k) / static_cast<double>(n);
      EXPECT_NEAR(ci.low, wilson_root(phat, static_cast<double>(n), kWilsonZ95, false), 1e-9);
      EXPECT_NEAR(ci.high, wilson_root(phat, static_cast<double>(n), kWilsonZ95, true), 1e-9);
      EXPECT_LE(ci.low, phat);
      EXPECT_GE(ci.high, phat);
    }
  }
  EXPECT_THROW(wilson_interval(0, 0), Error);
}

TEST(RejectionRate, NullSize) {
  const auto r = rejection_rate(canonical_curve(), canonical_grad(), config(Sidedness::one_sided), 0.0, 2000, 10000, 1);
  EXPECT_EQ(r.theta, 0.0);
  EXPECT_NEAR(r.theoretical_power, 0.05, 1e-12);
  EXPECT_GE(r.empirical_rate, 0.043);
  EXPECT_LE(r.empirical_rate, 0.057);
  EXPECT_LE(r.ci_low, r.empirical_rate);
  EXPECT_LE(r.empirical_rate, r.ci_high);
}

TEST(RejectionRate, LocalPower) {
  const auto r = rejection_rate(canonical_curve(), canonical_grad(), config(Sidedness::one_sided), 2.0, 2000, 10000, 2);
  EXPECT_NEAR(r.theta, 2.0 / 3, 1e-15);
  EXPECT_NEAR(r.theoretical_power, 0.4088, 1e-4);
  EXPECT_NEAR(r.empirical_rate, r.theoretical_power, 0.02);
}

TEST(RejectionRate, OrthogonalTangentKeepsLevel) {
  const LocalCurve<FiniteMeasure> ortho(make_tangent(uniform_finite(3), AtomFunction{{0, 1, -1}}));
  const auto r = rejection_rate(ortho, canonical_grad(), config(Sidedness::two_sided), 2.0, 2000, 10000, 3);
  EXPECT_NEAR(r.theta, 0.0, 1e-15);
  EXPECT_NEAR(r.theoretical_power, 0.05, 1e-12);
  EXPECT_TRUE(r.ci_contains(0.05)) << r.empirical_rate;
}

TEST(RejectionRate, WorkerCountDoesNotMatter) {
  const auto a = rejection_rate(canonical_curve(), canonical_grad(), config(Sidedness::one_sided), 1.0, 500, 1000, 4, 1);
  const auto b = rejection_rate(canonical_curve(), canonical_grad(), config(Sidedness::one_sided), 1.0, 500, 1000, 4, 4);
  EXPECT_EQ(a.rejections, b.rejections);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_THROW(rejection_rate(canonical_curve(), canonical_grad(), config(Sidedness::one_sided), 1.0, 500, 99, 4),
               Error);
}

TEST(PowerSweep, GridShapes) {
  const auto curve = canonical_curve();
  const auto grad = canonical_grad();
  const std::vector<double> zero{0.0};
  const auto single = power_sweep(curve, grad, config(Sidedness::one_sided), zero, 200, 200, 5);
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_EQ(single.rows[0].rejections,
            rejection_rate(curve, grad, config(Sidedness::one_sided), 0.0, 200, 200, 5).rejections);

  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 3.0};
  const auto sweep = power_sweep(curve, grad, config(Sidedness::one_sided), grid, 200, 200, 5);
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    EXPECT_GT(sweep.rows[i].theoretical_power, sweep.rows[i - 1].theoretical_power);
  }

  const auto mirrored = scaled_curve(curve, -1.0);
  const auto two = config(Sidedness::two_sided);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto plus = rejection_rate(curve, grad, two, t, 200, 200, 6);
    const auto minus = rejection_rate(mirrored, grad, two, t, 200, 200, 6);
    EXPECT_NEAR(plus.theoretical_power, minus.theoretical_power, 1e-15);
    EXPECT_NEAR(plus.theta, -minus.theta, 1e-15);
  }

  const std::vector<double> bad{0.0, 0.0};
  EXPECT_THROW(power_sweep(curve, grad, two, bad, 200, 200, 5), Error);
  EXPECT_THROW(power_sweep(curve, grad, two, std::vector<double>{}, 200, 200, 5), Error);
}

TEST(Calibration, WilsonCoverageAtNull) {
  // Continuous model so the statistic has no lattice effects at small n.
  const auto u = ContinuousMeasure::uniform(0.0, 1.0);
  const LocalCurve<ContinuousMeasure> curve(make_tangent(u, polynomial({-1.0, 2.0}, 1.0)));
  const auto grad = von_mises_gradient(u, polynomial({0.0, 1.0}, 1.0));
  int covered = 0;
  for (std::uint64_t run = 0; run < 200; ++run) {
    const auto r = rejection_rate(curve, grad, config(Sidedness::one_sided), 0.0, 100, 2000, derive_seed(555, run));
    if (r.ci_contains(0.05)) ++covered;
  }
  EXPECT_GE(covered, 180);
}

TEST(Calibration, ErrorShrinksWithN) {
  const auto curve = canonical_curve();
  const auto grad = canonical_grad();
  double small = 0.0;
  double large = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = rejection_rate(curve, grad, config(Sidedness::one_sided), 2.0, 50, 2000, derive_seed(77, seed));
    const auto b = rejection_rate(curve, grad, config(Sidedness::one_sided), 2.0, 5000, 2000, derive_seed(77, seed));
    small += std::abs(a.empirical_rate - a.theoretical_power);
    large += std::abs(b.empirical_rate - b.theoretical_power);
  }
  EXPECT_LE(large / 20.0, small / 20.0);
}

}  // namespace
}  // namespace functest
