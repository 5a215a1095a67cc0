#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "saa4pde/mesh.hpp"

namespace saa4pde {

/// Bounds at or beyond this magnitude mean "no box".
inline constexpr double kNoBound = 1e300;

/// psi(u) = gamma ||u||_{L1} + indicator of lo <= u <= hi, plus the Tikhonov
/// weight alpha of the smooth part.
struct RegularizerParams {
  double gamma = 0.0;
  double lo = -kNoBound;
  double hi = kNoBound;
  double alpha = 1.0;

  double threshold() const { return gamma / alpha; }

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("RegularizerParams: alpha must be positive");
    if (!(gamma >= 0.0))
      throw std::invalid_argument("RegularizerParams: gamma must be nonnegative");
    if (lo > 0.0 || hi < 0.0)
      throw std::invalid_argument("RegularizerParams: the box must contain 0 (lo = " +
                                  std::to_string(lo) + ", hi = " + std::to_string(hi) + ")");
  }
};

/// clamp(soft_shrink(v, threshold), lo, hi). Valid because the box contains 0.
inline double prox_scalar(double v, double threshold, double lo, double hi) {
  if (lo > 0.0 || hi < 0.0)
    throw std::invalid_argument("prox_scalar: the box must contain 0");
  if (!(threshold >= 0.0)) throw std::invalid_argument("prox_scalar: negative threshold");
  const double a = std::abs(v) - threshold;
  const double s = a > 0.0 ? std::copysign(a, v) : 0.0;
  return s < lo ? lo : (s > hi ? hi : s);
}

inline P0Field prox_field(std::span<const double> v, const RegularizerParams& p) {
  p.validate();
  const double t = p.threshold();
  P0Field out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = prox_scalar(v[i], t, p.lo, p.hi);
  return out;
}

/// Generalized derivative of prox at v: 1 where the shrunk value lies
/// strictly inside the box and |v| > threshold, 0 otherwise (ties included).
inline bool prox_derivative(double v, const RegularizerParams& p) {
  const double t = p.threshold();
  if (!(std::abs(v) > t)) return false;
  const double s = std::copysign(std::abs(v) - t, v);
  return s > p.lo && s < p.hi;
}

/// Discrete L2(P0) norm with per-cell areas.
inline double l2_norm_p0(std::span<const double> v, std::span<const double> areas) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += areas[i] * v[i] * v[i];
  return std::sqrt(s);
}

/// Phi(v) = G(prox(v)) + alpha v.
template <class GradientFn>
P0Field normal_map_residual(std::span<const double> v, GradientFn&& gradient_at,
                            const RegularizerParams& p) {
  const P0Field u = prox_field(v, p);
  P0Field r = gradient_at(std::span<const double>(u));
  if (r.size() != v.size()) throw std::invalid_argument("normal_map_residual: size mismatch");
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += p.alpha * v[i];
  return r;
}

/// ||u - prox(-(1/alpha) G(u))|| in the discrete L2(P0) norm.
template <class GradientFn>
double criticality(std::span<const double> u, GradientFn&& ref_gradient_at,
                   const RegularizerParams& p, std::span<const double> areas) {
  P0Field g = ref_gradient_at(u);
  if (g.size() != u.size()) throw std::invalid_argument("criticality: size mismatch");
  for (double& x : g) x = -x / p.alpha;
  const P0Field pu = prox_field(g, p);
  P0Field d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - pu[i];
  return l2_norm_p0(d, areas);
}

}  // namespace saa4pde
