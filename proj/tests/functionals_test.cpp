#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "functest/functionals.hpp"
#include "oracles.hpp"

namespace functest {
namespace {

ErrorCode code_of(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

FiniteMeasure random_measure(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = u(rng));
  for (auto& x : w) x /= s;
  return make_finite_measure(default_labels(m), w);
}

TEST(VonMises, Values) {
  const auto p = uniform_finite(3);
  EXPECT_NEAR(von_mises_value(p, AtomFunction{{1, 0, 0}}), 1.0 / 3, 1e-15);
  const auto q = make_finite_measure(default_labels(3), {0.5, 0.3, 0.2});
  EXPECT_NEAR(von_mises_value(q, AtomFunction{{1, 2, 3}}), 1.7, 1e-15);
  EXPECT_NEAR(von_mises_value(q, AtomFunction{{4.5, 4.5, 4.5}}), 4.5, 1e-15);
}

TEST(VonMises, GradientExamples) {
  const auto p = uniform_finite(3);
  const auto g = von_mises_gradient(p, AtomFunction{{1, 0, 0}});
  EXPECT_NEAR(g.evaluate(0), 2.0 / 3, 1e-15);
  EXPECT_NEAR(g.evaluate(1), -1.0 / 3, 1e-15);
  EXPECT_NEAR(g.evaluate(2), -1.0 / 3, 1e-15);
  EXPECT_NEAR(g.norm_sq, 2.0 / 9, 1e-15);

  EXPECT_EQ(code_of([&] { von_mises_gradient(p, AtomFunction{{5, 5, 5}}); }), ErrorCode::DegenerateGradient);

  const auto half = uniform_finite(2);
  const auto b = von_mises_gradient(half, AtomFunction{{1, 0}});
  EXPECT_NEAR(b.evaluate(0), 0.5, 1e-15);
  EXPECT_NEAR(b.evaluate(1), -0.5, 1e-15);
  EXPECT_NEAR(b.norm_sq, 0.25, 1e-15);
}

TEST(VonMises, ContinuousKernel) {
  const auto u = ContinuousMeasure::uniform(0.0, 1.0);
  const auto g = von_mises_gradient(u, polynomial({0.0, 1.0}, 1.0));
  EXPECT_NEAR(g.evaluate(0.75), 0.25, 1e-9);
  EXPECT_NEAR(g.norm_sq, 1.0 / 12, 1e-9);
  EXPECT_NEAR(u.expect(g.evaluate), 0.0, 1e-8);
}

TEST(VonMises, ShiftInvariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_measure(rng, 2 + trial % 5);
    AtomFunction h{std::vector<double>(p.size())};
    for (auto& v : h.values) v = z(rng);
    const double c = 10.0 * z(rng);
    const auto a = von_mises_gradient(p, h);
    const auto b = von_mises_gradient(p, affine(h, 1.0, c));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(a.evaluate(i), b.evaluate(i), 1e-12);
  }
}

TEST(Median, Values) {
  EXPECT_DOUBLE_EQ(median_value(ContinuousMeasure::uniform(0.0, 1.0)), 0.5);
  EXPECT_DOUBLE_EQ(median_value(ContinuousMeasure::uniform(2.0, 6.0)), 4.0);
  EXPECT_NEAR(median_value(ContinuousMeasure::exponential(1.0)), std::log(2.0), 1e-15);
}

TEST(Median, GradientExamples) {
  const auto u = ContinuousMeasure::uniform(0.0, 1.0);
  const auto g = median_gradient(u, 1.0);
  EXPECT_DOUBLE_EQ(g.evaluate(0.2), -0.5);
  EXPECT_DOUBLE_EQ(g.evaluate(0.9), 0.5);
  EXPECT_DOUBLE_EQ(g.evaluate(0.5), 0.0);
  EXPECT_DOUBLE_EQ(g.norm_sq, 0.25);
  EXPECT_NEAR(u.expect(g.evaluate), 0.0, 1e-8);
  EXPECT_NEAR(u.expect(product(g.evaluate, g.evaluate)), g.norm_sq, 1e-10);

  EXPECT_DOUBLE_EQ(median_gradient(ContinuousMeasure::uniform(0.0, 2.0), 0.5).norm_sq, 1.0);
  EXPECT_EQ(code_of([&] { median_gradient(u, 0.0); }), ErrorCode::NonpositiveDensity);
}

TEST(Median, ExponentialBaseIsMeanZero) {
  const auto e = ContinuousMeasure::exponential(1.0);
  const auto g = median_gradient(e, 0.5);  // f(ln 2) = 1/2
  EXPECT_NEAR(e.expect(g.evaluate), 0.0, 1e-8);
  EXPECT_NEAR(e.expect(product(g.evaluate, g.evaluate)), g.norm_sq, 1e-10);
}

TEST(Multinomial, Values) {
  const auto p = uniform_finite(3);
  EXPECT_NEAR(multinomial_value(p, [](std::span<const double> x) { return x[0]; }), 1.0 / 3, 1e-15);
  const auto q = make_finite_measure(default_labels(2), {0.2, 0.8});
  EXPECT_NEAR(multinomial_value(q, [](std::span<const double> x) { return x[0] * x[1]; }), 0.16, 1e-15);
  EXPECT_EQ(multinomial_value(q, [](std::span<const double>) { return 0.0; }), 0.0);
}

TEST(Multinomial, GradientExamples) {
  const auto p = uniform_finite(3);
  const std::vector<double> w{1, 0, 0};
  const auto g = multinomial_gradient(p, w);
  EXPECT_NEAR(g.evaluate(0), 2.0 / 3, 1e-15);
  EXPECT_NEAR(g.evaluate(1), -1.0 / 3, 1e-15);
  EXPECT_NEAR(g.evaluate(2), -1.0 / 3, 1e-15);

  const std::vector<double> flat{2, 2, 2};
  EXPECT_EQ(code_of([&] { multinomial_gradient(p, flat); }), ErrorCode::DegenerateGradient);

  const std::vector<double> pm{1, -1};
  const auto b = multinomial_gradient(uniform_finite(2), pm);
  EXPECT_NEAR(b.evaluate(0), 1.0, 1e-15);
  EXPECT_NEAR(b.evaluate(1), -1.0, 1e-15);
  EXPECT_NEAR(b.norm_sq, 1.0, 1e-15);

  const std::vector<double> short_w{1, 0};
  EXPECT_THROW(multinomial_gradient(p, short_w), Error);
}

TEST(Multinomial, LinearFunctionalMatchesVonMises) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_measure(rng, 2 + trial % 6);
    std::vector<double> w(p.size());
    for (auto& v : w) v = z(rng);
    const auto a = multinomial_gradient(p, w);
    const auto b = von_mises_gradient(p, AtomFunction{w});
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(a.evaluate(i), b.evaluate(i), 1e-12);
    EXPECT_NEAR(a.norm_sq, b.norm_sq, 1e-12);
  }
}

TEST(Multinomial, SuppliedWeightsMatchFiniteDifferences) {
  // f(p) = p1 p2 + p3^2 at (0.2, 0.5, 0.3): weights (0.5, 0.2, 0.6).
  auto f = [](std::span<const double> x) { return x[0] * x[1] + x[2] * x[2]; };
  const std::vector<double> supplied{0.5, 0.2, 0.6};
  const auto fd = oracle::gradient(f, {0.2, 0.5, 0.3});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(fd[i], supplied[i], 1e-8);
}

TEST(Gradients, MeanZeroAndNormConsistency) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_measure(rng, 2 + trial % 6);
    AtomFunction h{std::vector<double>(p.size())};
    for (auto& v : h.values) v = z(rng);
    const auto g = von_mises_gradient(p, h);
    EXPECT_NEAR(expect(p, g.evaluate), 0.0, 1e-14);
    EXPECT_NEAR(expect(p, product(g.evaluate, g.evaluate)), g.norm_sq, 1e-10);
    EXPECT_GT(g.norm_sq, 0.0);
  }
}

TEST(Orthogonality, Examples) {
  const auto p = uniform_finite(3);
  const auto k = von_mises_gradient(p, AtomFunction{{1, 0, 0}});
  EXPECT_NEAR(orthogonality_check(k.evaluate, k, p), k.norm_sq, 1e-15);
  EXPECT_NEAR(orthogonality_check(AtomFunction{{0, 1, -1}}, k, p), 0.0, 1e-15);
  EXPECT_EQ(orthogonality_check(AtomFunction{{0, 0, 0}}, k, p), 0.0);
  EXPECT_THROW(orthogonality_check(AtomFunction{{0, 1, -1}}, k, make_finite_measure(default_labels(3), {0.2, 0.3, 0.5})),
               Error);
}

TEST(FunctionalSpec, Dispatch) {
  const auto p = uniform_finite(3);
  FunctionalSpec<FiniteMeasure> spec =
      MultinomialSmooth{[](std::span<const double> x) { return x[0]; }, {1.0, 0.0, 0.0}};
  EXPECT_NEAR(functional_value(spec, p), 1.0 / 3, 1e-15);
  EXPECT_NEAR(canonical_gradient(spec, p).norm_sq, 2.0 / 9, 1e-15);
  FunctionalSpec<FiniteMeasure> median = Median{1.0};
  EXPECT_THROW(canonical_gradient(median, p), Error);

  const auto u = ContinuousMeasure::uniform(0.0, 1.0);
  FunctionalSpec<ContinuousMeasure> med = Median{1.0};
  EXPECT_DOUBLE_EQ(functional_value(med, u), 0.5);
  EXPECT_DOUBLE_EQ(canonical_gradient(med, u).norm_sq, 0.25);
}

}  // namespace
}  // namespace functest
