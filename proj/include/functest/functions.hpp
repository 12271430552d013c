#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "functest/error.hpp"

namespace functest {

/// A real function on a finite sample space, stored as one value per atom.
struct AtomFunction {
  std::vector<double> values;

  double operator()(std::size_t atom) const { return values[atom]; }
  std::size_t size() const noexcept { return values.size(); }

  bool operator==(const AtomFunction&) const = default;
};

/// A real function on the line. `bound` is a known bound on sup|f| (infinite when
/// none is known) and `breakpoints` lists jump locations that quadrature must cut at.
struct RealFunction {
  std::function<double(double)> fn;
  double bound = std::numeric_limits<double>::infinity();
  std::vector<double> breakpoints;

  double operator()(double x) const { return fn(x); }
  bool bounded() const noexcept { return std::isfinite(bound); }
};

/// a * f + b
inline AtomFunction affine(const AtomFunction& f, double a, double b) {
  AtomFunction out{f.values};
  for (double& v : out.values) v = a * v + b;
  return out;
}

inline RealFunction affine(const RealFunction& f, double a, double b) {
  RealFunction out;
  out.fn = [g = f.fn, a, b](double x) { return a * g(x) + b; };
  out.bound = std::abs(a) * f.bound + std::abs(b);
  if (a == 0.0) out.bound = std::abs(b);
  out.breakpoints = f.breakpoints;
  return out;
}

inline AtomFunction product(const AtomFunction& f, const AtomFunction& g) {
  if (f.size() != g.size()) fail(ErrorCode::SupportMismatch, "atom functions differ in length");
  AtomFunction out{f.values};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= g.values[i];
  return out;
}

inline RealFunction product(const RealFunction& f, const RealFunction& g) {
  RealFunction out;
  out.fn = [a = f.fn, b = g.fn](double x) { return a(x) * b(x); };
  out.bound = f.bound * g.bound;
  out.breakpoints = f.breakpoints;
  out.breakpoints.insert(out.breakpoints.end(), g.breakpoints.begin(), g.breakpoints.end());
  std::sort(out.breakpoints.begin(), out.breakpoints.end());
  out.breakpoints.erase(std::unique(out.breakpoints.begin(), out.breakpoints.end()),
                        out.breakpoints.end());
  return out;
}

inline AtomFunction constant_like(const AtomFunction& f, double c) {
  return AtomFunction{std::vector<double>(f.size(), c)};
}

inline RealFunction constant_like(const RealFunction&, double c) {
  return RealFunction{[c](double) { return c; }, std::abs(c), {}};
}

/// x -> scale * sign(x - center), with sign(0) = 0.
inline RealFunction sign_function(double center, double scale) {
  return RealFunction{
      [center, scale](double x) {
        return x > center ? scale : (x < center ? -scale : 0.0);
      },
      std::abs(scale),
      {center}};
}

/// Polynomial sum_k coefficients[k] x^k. The bound is filled in when the caller
/// supplies a finite radius R with |x| <= R on the domain of interest.
inline RealFunction polynomial(std::vector<double> coefficients,
                               double radius = std::numeric_limits<double>::infinity()) {
  double bound = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (coefficients[k] != 0.0) bound += std::abs(coefficients[k]) * std::pow(radius, static_cast<double>(k));
  }
  RealFunction out;
  out.fn = [c = std::move(coefficients)](double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  out.bound = bound;
  return out;
}

}  // namespace functest
