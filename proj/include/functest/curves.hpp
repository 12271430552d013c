#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/functions.hpp"
#include "functest/measures.hpp"
#include "functest/random.hpp"

namespace functest {

/// A mean-zero score g in L2(base). On continuous bases g must be bounded, with the
/// bound carried in evaluate.bound, whenever it is used to sample perturbed measures.
template <class M>
struct TangentFunction {
  function_t<M> evaluate;
  M base;
  double norm_sq = 0.0;

  double operator()(const typename M::point_type& x) const { return evaluate(x); }
};

/// Centers `raw` under P0.
template <class M>
TangentFunction<M> make_tangent(const M& p0, const function_t<M>& raw) {
  if constexpr (std::is_same_v<M, FiniteMeasure>) {
    if (raw.size() != p0.size()) fail(ErrorCode::InvalidArgument, "tangent length differs from atom count");
  }
  const double mean = p0.expect(raw);
  auto g = affine(raw, 1.0, -mean);
  const double norm_sq = p0.expect(product(g, g));
  return TangentFunction<M>{std::move(g), p0, norm_sq};
}

/// The curve t -> P_{t s g} with density c^{-1} (1 + t s g / 2)^2 relative to the
/// base, where s is the curve's scale. Scaling is stored rather than folded into g
/// so that scaled_curve(c, a) at t and c at a*t evaluate identical expressions.
template <class M>
class LocalCurve {
 public:
  explicit LocalCurve(TangentFunction<M> direction, double scale = 1.0)
      : direction_(std::move(direction)), scale_(scale) {}

  const M& base() const noexcept { return direction_.base; }
  const TangentFunction<M>& direction() const noexcept { return direction_; }
  double scale() const noexcept { return scale_; }

  /// Effective tangent scale * g.
  TangentFunction<M> tangent() const {
    return TangentFunction<M>{affine(direction_.evaluate, scale_, 0.0), direction_.base,
                              scale_ * scale_ * direction_.norm_sq};
  }

  /// Combined parameter s = scale * t at which the direction g is perturbed.
  double step(double t) const noexcept { return scale_ * t; }

 private:
  TangentFunction<M> direction_;
  double scale_;
};

/// Rescaled curve: the same base with tangent a * g.
template <class M>
LocalCurve<M> scaled_curve(const LocalCurve<M>& curve, double a) {
  return LocalCurve<M>(curve.direction(), curve.scale() * a);
}

namespace detail {

inline double normalizer_at(double step, double direction_norm_sq) {
  return 1.0 + step * step / 4.0 * direction_norm_sq;
}

}  // namespace detail

/// c(tg) = 1 + (t^2 / 4) * integral g^2 dP0 >= 1.
template <class M>
double normalizer(const LocalCurve<M>& curve, double t) {
  return detail::normalizer_at(curve.step(t), curve.direction().norm_sq);
}

/// Density ratio dP_{tg}/dP0 at a point where g takes the value `g_value`.
template <class M>
double density_ratio(const LocalCurve<M>& curve, double t, double g_value) {
  const double s = curve.step(t);
  const double root = 1.0 + s * g_value / 2.0;
  return root * root / detail::normalizer_at(s, curve.direction().norm_sq);
}

// ---------------------------------------------------------------------------
// Perturbed continuous measure
// ---------------------------------------------------------------------------

/// P_{tg} for a continuous base, sampled by rejection from the base with envelope
/// M = c^{-1} (1 + |t| sup|g| / 2)^2.
class PerturbedMeasure {
 public:
  using point_type = double;
  using function_type = RealFunction;

  PerturbedMeasure(const LocalCurve<ContinuousMeasure>& curve, double t)
      : base_(curve.base()), direction_(curve.direction().evaluate), step_(curve.step(t)),
        normalizer_(functest::normalizer(curve, t)) {
    if (step_ != 0.0 && !direction_.bounded()) {
      fail(ErrorCode::InvalidArgument, "rejection sampling needs a bounded tangent");
    }
    const double root = 1.0 + std::abs(step_) * (step_ == 0.0 ? 0.0 : direction_.bound) / 2.0;
    envelope_ = root * root / normalizer_;
  }

  const ContinuousMeasure& base() const noexcept { return base_; }
  double envelope() const noexcept { return envelope_; }
  double normalizer() const noexcept { return normalizer_; }

  double density_ratio(double x) const {
    const double root = 1.0 + step_ * direction_(x) / 2.0;
    return root * root / normalizer_;
  }

  double pdf(double x) const { return base_.pdf(x) * density_ratio(x); }

  Sample<double> draw(std::size_t n, std::uint64_t seed) const {
    if (n == 0) fail(ErrorCode::InvalidArgument, "sample size must be at least 1");
    UniformStream stream(seed);
    Sample<double> out{{}, seed};
    out.values.reserve(n);
    while (out.values.size() < n) {
      const double x = base_.quantile(stream.next());
      if (stream.next() * envelope_ < density_ratio(x)) out.values.push_back(x);
    }
    return out;
  }

  template <class F>
  double expect(const F& f, std::span<const double> breakpoints = {}) const {
    std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
    cuts.insert(cuts.end(), direction_.breakpoints.begin(), direction_.breakpoints.end());
    return base_.expect([&](double x) { return f(x) * density_ratio(x); }, cuts);
  }

  double expect(const RealFunction& f) const { return expect(f.fn, f.breakpoints); }

 private:
  ContinuousMeasure base_;
  RealFunction direction_;
  double step_;
  double normalizer_;
  double envelope_ = 1.0;
};

template <class M>
using curve_measure_t = std::conditional_t<std::is_same_v<M, FiniteMeasure>, FiniteMeasure, PerturbedMeasure>;

/// P_{tg}. Finite bases give q_j = p_j (1 + t g_j / 2)^2 / c(tg), renormalized to
/// unit mass; t = 0 or g = 0 returns the base unchanged.
inline FiniteMeasure measure_at(const LocalCurve<FiniteMeasure>& curve, double t) {
  const auto& base = curve.base();
  const double s = curve.step(t);
  if (s == 0.0 || curve.direction().norm_sq == 0.0) return base;
  const double c = detail::normalizer_at(s, curve.direction().norm_sq);
  std::vector<double> q(base.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double root = 1.0 + s * curve.direction().evaluate(j) / 2.0;
    q[j] = base.prob(j) * root * root / c;
  }
  return base.reweighted(std::move(q));
}

inline PerturbedMeasure measure_at(const LocalCurve<ContinuousMeasure>& curve, double t) {
  return PerturbedMeasure(curve, t);
}

// ---------------------------------------------------------------------------
// Local sequences and the local parameter
// ---------------------------------------------------------------------------

/// The sequence P_{t_n} with t_n = t / sqrt(n) along a curve.
template <class M>
struct LocalSequence {
  LocalCurve<M> curve;
  double t = 0.0;

  LocalSequence(LocalCurve<M> c, double t_limit) : curve(std::move(c)), t(t_limit) {
    if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "local sequences need t >= 0");
  }

  double t_n(std::size_t n) const { return t / std::sqrt(static_cast<double>(n)); }
  curve_measure_t<M> measure(std::size_t n) const { return measure_at(curve, t_n(n)); }
};

/// t * integral g k dP0 for the curve's effective tangent, for any real t.
template <class M>
double local_shift(const LocalCurve<M>& curve, double t, const CanonicalGradient<M>& grad) {
  if (!(grad.base == curve.base())) fail(ErrorCode::BaseMismatch, "gradient and curve have different bases");
  const double inner = curve.base().expect(product(curve.direction().evaluate, grad.evaluate));
  return curve.step(t) * inner;
}

/// theta = t * integral g k dP0. Positive: implicit one-sided alternative; zero:
/// implicit hypothesis of the two-sided problem; nonzero: two-sided alternative.
template <class M>
double local_parameter(const LocalSequence<M>& seq, const CanonicalGradient<M>& grad) {
  return local_shift(seq.curve, seq.t, grad);
}

// ---------------------------------------------------------------------------
// Finite-difference verification
// ---------------------------------------------------------------------------

/// Errors e(t) on a shrinking grid together with the fitted constant
/// C = max e(t)/t, the log-log slope of e against t, and whether e strictly
/// decreases along the grid.
struct RateReport {
  std::vector<double> ts;
  std::vector<double> errors;
  double rate_constant = 0.0;
  double order = 0.0;
  bool monotone = true;

  bool within_linear_bound() const {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (errors[i] > rate_constant * ts[i]) return false;
    }
    return true;
  }
};

struct DerivativeReport {
  RateReport rate;
  double target = 0.0;
  std::vector<double> forward_slopes;
  std::vector<double> backward_slopes;
};

namespace detail {

inline void check_grid(std::span<const double> ts) {
  if (ts.empty()) fail(ErrorCode::InvalidArgument, "empty t grid");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) fail(ErrorCode::InvalidArgument, "t values must be positive");
    if (i > 0 && !(ts[i] < ts[i - 1])) fail(ErrorCode::InvalidArgument, "t values must be strictly decreasing");
  }
}

inline void finish_rate(RateReport& r) {
  r.rate_constant = 0.0;
  r.monotone = true;
  for (std::size_t i = 0; i < r.ts.size(); ++i) {
    r.rate_constant = std::max(r.rate_constant, r.errors[i] / r.ts[i]);
    if (i > 0 && !(r.errors[i] < r.errors[i - 1])) r.monotone = false;
  }
  // Least-squares slope of log e on log t over points with e > 0.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < r.ts.size(); ++i) {
    if (!(r.errors[i] > 0.0)) continue;
    const double x = std::log(r.ts[i]);
    const double y = std::log(r.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1.0;
  }
  const double denom = count * sxx - sx * sx;
  r.order = count >= 2.0 && denom > 0.0 ? (count * sxy - sx * sy) / denom
                                        : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// || (2/t)(sqrt(dP_t/dP0) - 1) - g ||_{L2(P0)} on each t of a decreasing grid.
inline RateReport verify_l2_differentiability(const LocalCurve<FiniteMeasure>& curve, std::span<const double> ts) {
  detail::check_grid(ts);
  const auto g = curve.tangent();
  const auto& p0 = curve.base();
  RateReport out;
  out.ts.assign(ts.begin(), ts.end());
  for (double t : ts) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p0.size(); ++j) {
      if (p0.prob(j) == 0.0) continue;
      const double root = std::sqrt(density_ratio(curve, t, curve.direction().evaluate(j)));
      const double d = 2.0 / t * (root - 1.0) - g.evaluate(j);
      acc += p0.prob(j) * d * d;
    }
    out.errors.push_back(std::sqrt(acc));
  }
  detail::finish_rate(out);
  return out;
}

/// Difference quotients (k(P_t) - k(P0))/t from both sides against the target
/// integral k g dP0. The error at t is the worse of the two one-sided quotients.
/// `value` maps a curve measure to the functional's value.
template <class M, class Value>
DerivativeReport verify_functional_derivative(const LocalCurve<M>& curve, const Value& value,
                                              const CanonicalGradient<M>& grad, std::span<const double> ts) {
  detail::check_grid(ts);
  DerivativeReport out;
  out.target = local_shift(curve, 1.0, grad);
  const double k0 = value(measure_at(curve, 0.0));
  out.rate.ts.assign(ts.begin(), ts.end());
  for (double t : ts) {
    const double forward = (value(measure_at(curve, t)) - k0) / t;
    const double backward = (k0 - value(measure_at(curve, -t))) / t;
    out.forward_slopes.push_back(forward);
    out.backward_slopes.push_back(backward);
    out.rate.errors.push_back(std::max(std::abs(forward - out.target), std::abs(backward - out.target)));
  }
  detail::finish_rate(out.rate);
  return out;
}

}  // namespace functest
