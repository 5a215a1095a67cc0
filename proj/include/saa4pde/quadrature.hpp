#pragma once

#include <array>
#include <vector>

namespace saa4pde {

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights are normalized to sum to one, so the integral over a physical
/// triangle is area * sum_q w_q f(x_q).
struct QuadRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Three interior points, exact for quadratics.
inline const QuadRule& quad_degree2() {
  static const QuadRule rule{
      {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
       {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
       {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
      2};
  return rule;
}

/// Strang-Fix/Dunavant six-point rule, exact for quartics.
inline const QuadRule& quad_degree4() {
  static const QuadRule rule = [] {
    constexpr double a = 0.44594849091596488632;
    constexpr double b = 0.09157621350977074346;
    constexpr double wa = 0.22338158967801146570;
    constexpr double wb = 0.10995174365532186764;
    QuadRule r;
    r.points = {{1.0 - 2.0 * a, a, a}, {a, 1.0 - 2.0 * a, a},
                {a, a, 1.0 - 2.0 * a}, {1.0 - 2.0 * b, b, b},
                {b, 1.0 - 2.0 * b, b}, {b, b, 1.0 - 2.0 * b}};
    r.weights = {wa, wa, wa, wb, wb, wb};
    r.degree = 4;
    return r;
  }();
  return rule;
}

}  // namespace saa4pde
