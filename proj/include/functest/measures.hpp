#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "functest/error.hpp"
#include "functest/functions.hpp"
#include "functest/quadrature.hpp"
#include "functest/random.hpp"

namespace functest {

inline constexpr double kMassTolerance = 1e-9;
inline constexpr double kEnumerationLimit = 1e7;

/// n observations together with the seed that produced them. For finite measures
/// the observations are atom indices.
template <class Point>
struct Sample {
  std::vector<Point> values;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const Sample&) const = default;
};

// ---------------------------------------------------------------------------
// FiniteMeasure
// ---------------------------------------------------------------------------
class FiniteMeasure {
 public:
  using point_type = std::size_t;
  using function_type = AtomFunction;

  /// Validates and renormalizes: probabilities must be nonnegative, atoms distinct
  /// and the total mass within 1e-9 of one; the weights are then divided by their sum.
  static FiniteMeasure make(std::vector<std::string> atoms, std::vector<double> probs) {
    if (atoms.size() != probs.size()) {
      fail(ErrorCode::InvalidArgument, "atoms and probs differ in length");
    }
    if (atoms.empty()) fail(ErrorCode::InvalidArgument, "a finite measure needs at least one atom");
    std::unordered_set<std::string> seen;
    for (const auto& a : atoms) {
      if (!seen.insert(a).second) fail(ErrorCode::DuplicateAtom, "atom '" + a + "' repeats");
    }
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        fail(ErrorCode::NegativeProbability, "probability " + std::to_string(p));
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      fail(ErrorCode::MassNotOne, "probabilities sum to " + std::to_string(total));
    }
    if (total != 1.0) {
      for (double& p : probs) p /= total;
    }
    return FiniteMeasure(std::move(atoms), std::move(probs));
  }

  /// Same atoms, new weights.
  FiniteMeasure reweighted(std::vector<double> probs) const { return make(atoms_, std::move(probs)); }

  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double prob(std::size_t i) const { return probs_[i]; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    auto it = std::find(atoms_.begin(), atoms_.end(), label);
    if (it == atoms_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - atoms_.begin());
  }

  bool same_support(const FiniteMeasure& other) const noexcept { return atoms_ == other.atoms_; }

  /// Inverse-CDF draws: atom i is chosen for the first i with u < cumulative[i].
  Sample<std::size_t> draw(std::size_t n, std::uint64_t seed) const {
    if (n == 0) fail(ErrorCode::InvalidArgument, "sample size must be at least 1");
    UniformStream stream(seed);
    Sample<std::size_t> out{std::vector<std::size_t>(n), seed};
    for (auto& v : out.values) v = bucket(stream.next());
    return out;
  }

  std::size_t bucket(double u) const noexcept {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(i, last_positive_);
  }

  template <class F>
  double expect(const F& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] != 0.0) acc += f(i) * probs_[i];
    }
    return acc;
  }

  bool operator==(const FiniteMeasure& other) const {
    return atoms_ == other.atoms_ && probs_ == other.probs_;
  }

 private:
  FiniteMeasure(std::vector<std::string> atoms, std::vector<double> probs)
      : atoms_(std::move(atoms)), probs_(std::move(probs)), cumulative_(probs_.size()) {
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
    last_positive_ = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] > 0.0) last_positive_ = i;
    }
  }

  std::vector<std::string> atoms_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

inline FiniteMeasure make_finite_measure(std::vector<std::string> atoms, std::vector<double> probs) {
  return FiniteMeasure::make(std::move(atoms), std::move(probs));
}

/// Atoms labelled "a1".."am".
inline std::vector<std::string> default_labels(std::size_t m) {
  std::vector<std::string> out;
  out.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) out.push_back("a" + std::to_string(i));
  return out;
}

inline FiniteMeasure uniform_finite(std::size_t m) {
  return make_finite_measure(default_labels(m), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

// ---------------------------------------------------------------------------
// ContinuousMeasure
// ---------------------------------------------------------------------------
class ContinuousMeasure {
 public:
  using point_type = double;
  using function_type = RealFunction;
  using Fn = std::function<double(double)>;

  ContinuousMeasure(std::string name, double lower, double upper, Fn pdf, Fn cdf, Fn quantile)
      : name_(std::move(name)), lower_(lower), upper_(upper), pdf_(std::move(pdf)),
        cdf_(std::move(cdf)), quantile_(std::move(quantile)) {
    if (!(lower_ < upper_)) fail(ErrorCode::InvalidArgument, "empty support for " + name_);
  }

  static ContinuousMeasure uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
      fail(ErrorCode::InvalidArgument, "uniform needs finite lower < upper");
    }
    const double w = b - a;
    return ContinuousMeasure(
        "uniform(" + std::to_string(a) + "," + std::to_string(b) + ")", a, b,
        [a, b, w](double x) { return x >= a && x <= b ? 1.0 / w : 0.0; },
        [a, b, w](double x) { return x <= a ? 0.0 : (x >= b ? 1.0 : (x - a) / w); },
        [a, w](double u) { return a + u * w; });
  }

  static ContinuousMeasure exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) fail(ErrorCode::InvalidArgument, "exponential rate must be positive");
    return ContinuousMeasure(
        "exponential(" + std::to_string(rate) + ")", 0.0, std::numeric_limits<double>::infinity(),
        [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); },
        [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); },
        [rate](double u) { return -std::log1p(-u) / rate; });
  }

  const std::string& name() const noexcept { return name_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double pdf(double x) const { return pdf_(x); }
  double cdf(double x) const { return cdf_(x); }
  double quantile(double u) const { return quantile_(u); }

  /// Largest |x| on the support, infinite for unbounded supports.
  double radius() const noexcept { return std::max(std::abs(lower_), std::abs(upper_)); }

  Sample<double> draw(std::size_t n, std::uint64_t seed) const {
    if (n == 0) fail(ErrorCode::InvalidArgument, "sample size must be at least 1");
    UniformStream stream(seed);
    Sample<double> out{std::vector<double>(n), seed};
    for (auto& v : out.values) v = quantile_(stream.next());
    return out;
  }

  /// Integral of f * pdf over the support. Unbounded ends are truncated at the
  /// 1e-15 tail quantile.
  template <class F>
  double expect(const F& f, std::span<const double> breakpoints = {}) const {
    const double lo = std::isfinite(lower_) ? lower_ : quantile_(kTailMass);
    const double hi = std::isfinite(upper_) ? upper_ : quantile_(1.0 - kTailMass);
    return integrate([&](double x) { return f(x) * pdf_(x); }, lo, hi, breakpoints);
  }

  double expect(const RealFunction& f) const { return expect(f.fn, f.breakpoints); }

  bool operator==(const ContinuousMeasure& other) const {
    return name_ == other.name_ && lower_ == other.lower_ && upper_ == other.upper_;
  }

 private:
  static constexpr double kTailMass = 1e-15;

  std::string name_;
  double lower_;
  double upper_;
  Fn pdf_;
  Fn cdf_;
  Fn quantile_;
};

// ---------------------------------------------------------------------------
// Free-function surface
// ---------------------------------------------------------------------------
template <class M>
auto draw(const M& measure, std::size_t n, std::uint64_t seed) {
  return measure.draw(n, seed);
}

template <class M, class F>
double expect(const M& measure, const F& f) {
  return measure.expect(f);
}

/// Hellinger distance (1/2 sum (sqrt p - sqrt q)^2)^(1/2).
inline double hellinger_distance(const FiniteMeasure& p, const FiniteMeasure& q) {
  if (!p.same_support(q)) fail(ErrorCode::SupportMismatch, "measures live on different atoms");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p.prob(i)) - std::sqrt(q.prob(i));
    acc += d * d;
  }
  return std::min(1.0, std::sqrt(0.5 * acc));
}

/// Total variation distance between the n-fold products, by enumerating all m^n
/// points of the product space.
inline double variational_distance_product(const FiniteMeasure& p, const FiniteMeasure& q, std::size_t n) {
  if (!p.same_support(q)) fail(ErrorCode::SupportMismatch, "measures live on different atoms");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  const std::size_t m = p.size();
  if (std::pow(static_cast<double>(m), static_cast<double>(n)) > kEnumerationLimit) {
    fail(ErrorCode::EnumerationTooLarge,
         std::to_string(m) + "^" + std::to_string(n) + " points exceed the enumeration limit");
  }
  // Odometer over Omega^n with prefix products cached per position.
  std::vector<std::size_t> digit(n, 0);
  std::vector<double> pp(n + 1, 1.0);
  std::vector<double> qp(n + 1, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    pp[k + 1] = pp[k] * p.prob(0);
    qp[k + 1] = qp[k] * q.prob(0);
  }
  double acc = 0.0;
  while (true) {
    acc += std::abs(pp[n] - qp[n]);
    std::size_t pos = n;
    while (pos > 0 && digit[pos - 1] + 1 == m) --pos;
    if (pos == 0) break;
    ++digit[pos - 1];
    for (std::size_t k = pos - 1; k < n; ++k) {
      if (k >= pos) digit[k] = 0;
      pp[k + 1] = pp[k] * p.prob(digit[k]);
      qp[k + 1] = qp[k] * q.prob(digit[k]);
    }
  }
  return 0.5 * acc;
}

}  // namespace functest
