#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "saa4pde/mesh.hpp"

namespace saa4pde {

inline constexpr std::size_t kParamDim = 100;

/// A point of the parameter box [-1, 1]^100.
using ParamVector = std::array<double, kParamDim>;

inline bool in_parameter_box(const ParamVector& xi) {
  for (double v : xi)
    if (!(v >= -1.0 && v <= 1.0)) return false;
  return true;
}

// The case-study random fields. xi is 0-based in code: xi_k in the usual
// 1-based notation is xi[k - 1].
namespace case_study {

inline double kappa(const Point2& x, const ParamVector& xi) {
  constexpr double pi = std::numbers::pi;
  if (x.x1 <= 0.5) {
    double s = 0.0;
    for (int k = 1; k <= 25; ++k) {
      const double kk = static_cast<double>(k);
      s += 5.0 / (2.0 * kk * kk) * std::sin(4.0 * kk * xi[k - 1] * pi * x.x1) *
           std::sin(4.0 * kk * pi * xi[25 + k - 1] * x.x2);
    }
    return std::exp(s);
  }
  double s = 1.5;
  for (int k = 1; k <= 25; ++k) {
    const double kk = static_cast<double>(k);
    const double c = xi[25 + k - 1];
    s += std::abs(10.0 / (kk * kk) * c * std::cos((10.0 + c) * x.x1 * x.x2));
  }
  return s;
}

inline double b(const Point2& x, const ParamVector& xi) {
  constexpr double pi = std::numbers::pi;
  if (x.x1 <= 0.75 + xi[75] / 2.0) {
    double s = 0.0;
    for (int k = 1; k <= 25; ++k) {
      const double kk = static_cast<double>(k);
      s += 5.0 / (kk * kk) * xi[75 + k - 1] * x.x1 * x.x2 *
           std::cos(4.0 * pi * kk * x.x1) * std::sin(4.0 * pi * kk * x.x2);
    }
    return 1.0 + s;
  }
  double s = 0.0;
  for (int k = 1; k <= 25; ++k) {
    const double kk = static_cast<double>(k);
    const double c = xi[75 + k - 1];
    s += 3.0 / (kk * kk) * x.x2 * c * std::sin(3.0 * pi * x.x2) *
         std::cos(3.0 * pi * (x.x1 - kk * x.x2 * c * x.x2));
  }
  return 1.0 + std::abs(s);
}

/// The sine argument carries xi_2 (not x_2), exactly as the model is stated.
inline double g(const Point2& x, const ParamVector& xi) {
  double s = 0.0;
  for (int k = 1; k <= 25; ++k) {
    const double kk = static_cast<double>(k);
    const double c = xi[50 + k - 1];
    s += 10.0 / (kk * kk) * c * std::sin((4.0 + kk) * c * x.x1 * xi[1]) *
         std::cos((4.0 + kk) * c * x.x1 * x.x2);
  }
  return std::max(1.0, s);
}

/// -1 on the closed square [1/4, 3/4]^2, +1 elsewhere.
inline double yd(const Point2& x) {
  const bool inside = x.x1 >= 0.25 && x.x1 <= 0.75 && x.x2 >= 0.25 && x.x2 <= 0.75;
  return inside ? -1.0 : 1.0;
}

/// Analytic infimum of kappa over the domain and parameter box; attained
/// only in the limit on the x1 <= 1/2 branch (the other branch is >= 3/2).
inline double kappa_min() {
  double s = 0.0;
  for (int k = 1; k <= 25; ++k) s += 1.0 / (static_cast<double>(k) * k);
  return std::exp(-2.5 * s);
}

}  // namespace case_study

using RandomCoefficient = std::function<double(const Point2&, const ParamVector&)>;

/// The set of coefficient functions defining one family of state equations.
/// Test configurations override individual members (kappa = 1, b = 0, ...).
struct FieldModel {
  RandomCoefficient kappa = case_study::kappa;
  RandomCoefficient b = case_study::b;
  RandomCoefficient g = case_study::g;
  std::function<double(const Point2&)> yd = case_study::yd;

  static FieldModel case_study_model() { return {}; }

  static RandomCoefficient constant(double c) {
    return [c](const Point2&, const ParamVector&) { return c; };
  }
};

}  // namespace saa4pde
