#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "functest/error.hpp"
#include "functest/functions.hpp"
#include "functest/measures.hpp"

namespace functest {

template <class M>
using function_t = typename M::function_type;

/// Gradients with squared norm at or below this are rejected: the tests divide by
/// the norm, so a vanishing gradient leaves them undefined.
inline constexpr double kDegenerateNormSq = 1e-12;

/// Canonical gradient of a functional at `base`, together with its squared
/// L2(base) norm.
template <class M>
struct CanonicalGradient {
  function_t<M> evaluate;
  double norm_sq = 0.0;
  M base;

  double norm() const { return std::sqrt(norm_sq); }
  double operator()(const typename M::point_type& x) const { return evaluate(x); }
};

// ---------------------------------------------------------------------------
// Functional kinds
// ---------------------------------------------------------------------------

/// k(P) = integral of `kernel` dP.
template <class M>
struct VonMises {
  function_t<M> kernel;
};

/// k(P) = med(P); the density of the base measure at its median is supplied.
struct Median {
  double density_at_median = 0.0;
};

/// k(P) = f(P{a1}, ..., P{am}) with weights[i] the partial derivative of f in
/// coordinate i at the base probabilities.
struct MultinomialSmooth {
  std::function<double(std::span<const double>)> f;
  std::vector<double> weights;
};

template <class M>
using FunctionalSpec = std::variant<VonMises<M>, Median, MultinomialSmooth>;

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------
template <class M>
double von_mises_value(const M& p, const function_t<M>& h) {
  return p.expect(h);
}

inline double median_value(const ContinuousMeasure& p) { return p.quantile(0.5); }

inline double multinomial_value(const FiniteMeasure& p, const std::function<double(std::span<const double>)>& f) {
  return f(std::span<const double>(p.probs()));
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------
namespace detail {

template <class M>
CanonicalGradient<M> centered_gradient(const M& p0, const function_t<M>& raw) {
  const double mean = p0.expect(raw);
  auto centered = affine(raw, 1.0, -mean);
  const double norm_sq = p0.expect(product(centered, centered));
  if (!(norm_sq > kDegenerateNormSq)) {
    fail(ErrorCode::DegenerateGradient, "squared gradient norm " + std::to_string(norm_sq) + " is not positive");
  }
  return CanonicalGradient<M>{std::move(centered), norm_sq, p0};
}

}  // namespace detail

/// h - E_{P0} h, with squared norm Var_{P0}(h).
template <class M>
CanonicalGradient<M> von_mises_gradient(const M& p0, const function_t<M>& h) {
  if constexpr (std::is_same_v<M, FiniteMeasure>) {
    if (h.size() != p0.size()) fail(ErrorCode::InvalidArgument, "kernel length differs from atom count");
  }
  return detail::centered_gradient(p0, h);
}

/// x -> sign(F(x) - 1/2) / (2 f(med)). The density must be continuous near the
/// median for this to be the gradient; that is the caller's responsibility.
inline CanonicalGradient<ContinuousMeasure> median_gradient(const ContinuousMeasure& p0, double density_at_median) {
  if (!(density_at_median > 0.0) || !std::isfinite(density_at_median)) {
    fail(ErrorCode::NonpositiveDensity, "density at the median is " + std::to_string(density_at_median));
  }
  const double scale = 1.0 / (2.0 * density_at_median);
  const double m = median_value(p0);
  RealFunction k;
  k.fn = [m, scale](double x) { return x > m ? scale : (x < m ? -scale : 0.0); };
  k.bound = scale;
  k.breakpoints = {m};
  return CanonicalGradient<ContinuousMeasure>{std::move(k), scale * scale, p0};
}

/// sum_i w_i (1{a_i} - p_i), evaluated on atom j as w_j - sum_i w_i p_i.
inline CanonicalGradient<FiniteMeasure> multinomial_gradient(const FiniteMeasure& p0, std::span<const double> weights) {
  if (weights.size() != p0.size()) fail(ErrorCode::InvalidArgument, "weight count differs from atom count");
  return detail::centered_gradient(p0, AtomFunction{{weights.begin(), weights.end()}});
}

/// Inner product of h with the gradient in L2(P0); zero means h lies in the
/// orthogonal complement of the gradient.
template <class M>
double orthogonality_check(const function_t<M>& h, const CanonicalGradient<M>& grad, const M& p0) {
  if (!(grad.base == p0)) fail(ErrorCode::BaseMismatch, "gradient was computed at a different base");
  return p0.expect(product(h, grad.evaluate));
}

// ---------------------------------------------------------------------------
// Dispatch over FunctionalSpec
// ---------------------------------------------------------------------------
template <class M>
CanonicalGradient<M> canonical_gradient(const FunctionalSpec<M>& spec, const M& p0) {
  return std::visit(
      [&](const auto& kind) -> CanonicalGradient<M> {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, VonMises<M>>) {
          return von_mises_gradient(p0, kind.kernel);
        } else if constexpr (std::is_same_v<K, Median>) {
          if constexpr (std::is_same_v<M, ContinuousMeasure>) {
            return median_gradient(p0, kind.density_at_median);
          } else {
            fail(ErrorCode::InvalidArgument, "the median functional needs a continuous base measure");
          }
        } else {
          if constexpr (std::is_same_v<M, FiniteMeasure>) {
            return multinomial_gradient(p0, kind.weights);
          } else {
            fail(ErrorCode::InvalidArgument, "the multinomial functional needs a finite base measure");
          }
        }
      },
      spec);
}

/// Value of the functional at p. P may be any measure with an expect() over the
/// same sample space (perturbed measures included) for von Mises functionals.
template <class M, class P>
double functional_value(const FunctionalSpec<M>& spec, const P& p) {
  return std::visit(
      [&](const auto& kind) -> double {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, VonMises<M>>) {
          return p.expect(kind.kernel);
        } else if constexpr (std::is_same_v<K, Median>) {
          if constexpr (std::is_same_v<P, ContinuousMeasure>) {
            return median_value(p);
          } else {
            fail(ErrorCode::InvalidArgument, "median value needs a continuous measure with a quantile function");
          }
        } else {
          if constexpr (std::is_same_v<P, FiniteMeasure>) {
            if (!kind.f) fail(ErrorCode::InvalidArgument, "multinomial functional has no value function");
            return multinomial_value(p, kind.f);
          } else {
            fail(ErrorCode::InvalidArgument, "multinomial value needs a finite measure");
          }
        }
      },
      spec);
}

}  // namespace functest
