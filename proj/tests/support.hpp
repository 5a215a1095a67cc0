#pragma once

// Helpers shared by the unit tests and the acceptance binary. Kept
// independent of the library routines they are used to check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "saa4pde/mesh.hpp"
#include "saa4pde/quadrature.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde::testing {

/// Value of a full-vertex P1 field at x, by locating the containing cell.
inline double eval_p1(const StructuredMesh& mesh, const std::vector<double>& field,
                      const Point2& x) {
  const std::size_t n = mesh.n;
  const double h = 1.0 / static_cast<double>(n);
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x.x1 / h), n - 1);
  std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(x.x2 / h), n - 1);
  const double s = x.x1 / h - static_cast<double>(i);
  const double t = x.x2 / h - static_cast<double>(j);
  const double f00 = field[j * (n + 1) + i], f10 = field[j * (n + 1) + i + 1];
  const double f01 = field[(j + 1) * (n + 1) + i], f11 = field[(j + 1) * (n + 1) + i + 1];
  // lower triangle (s >= t): v00, v10, v11; upper: v00, v11, v01
  if (s >= t) return f00 + s * (f10 - f00) + t * (f11 - f10);
  return f00 + t * (f01 - f00) + s * (f11 - f01);
}

/// ||f_h - f||_{L2} with a Gauss rule of degree 4 on every cell.
template <class Fn>
double l2_error(const StructuredMesh& mesh, const std::vector<double>& field, Fn&& f) {
  const auto& rule = quad_degree4();
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.points[q];
      Point2 x{0.0, 0.0};
      double fh = 0.0;
      for (int a = 0; a < 3; ++a) {
        x.x1 += lam[a] * mesh.vertices[tri[a]].x1;
        x.x2 += lam[a] * mesh.vertices[tri[a]].x2;
        fh += lam[a] * field[tri[a]];
      }
      const double e = fh - f(x);
      s += mesh.cell_area * rule.weights[q] * e * e;
    }
  }
  return std::sqrt(s);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

inline std::vector<double> random_field(UniformSampler& s, std::size_t size,
                                        double scale = 1.0) {
  std::vector<double> v(size);
  for (double& x : v) x = scale * s.next_symmetric();
  return v;
}

inline double manufactured_w(const Point2& x) {
  return std::sin(std::numbers::pi * x.x1) * std::sin(std::numbers::pi * x.x2);
}

/// Grid minimizer of t |w| + (v - w)^2 / 2 over [lo, hi]: a 1e-3 scan then a
/// 1e-6 scan around the coarse winner (the objective is convex).
inline double brute_force_prox(double v, double t, double lo, double hi) {
  const auto f = [&](double w) { return t * std::abs(w) + 0.5 * (v - w) * (v - w); };
  const auto scan = [&](double a, double b, double step) {
    double best = a, fbest = f(a);
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long k = 0; k <= count; ++k) {
      const double w = std::min(b, a + static_cast<double>(k) * step);
      if (f(w) < fbest) {
        fbest = f(w);
        best = w;
      }
    }
    if (f(b) < fbest) best = b;
    if (a <= 0.0 && b >= 0.0 && f(0.0) <= f(best)) best = 0.0;  // the kink
    return best;
  };
  const double coarse = scan(lo, hi, 1e-3);
  return scan(std::max(lo, coarse - 2e-3), std::min(hi, coarse + 2e-3), 1e-6);
}

}  // namespace saa4pde::testing
