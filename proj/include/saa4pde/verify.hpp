#pragma once

// Self-checks shared by the command-line tool and the acceptance runner:
// finite-difference gradient and Hessian probes, stability probes and the
// planner's hand-evaluated values.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "saa4pde/bounds.hpp"
#include "saa4pde/pde.hpp"
#include "saa4pde/saa.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde {

struct GradientCheck {
  double derivative = 0.0;  // <grad F(u), w>
  double slope = NAN;       // log-log slope of |FD - derivative| in h
  double best_relative = INFINITY;
  std::size_t points_used = 0;
};

inline const std::vector<double>& default_fd_steps() {
  static const std::vector<double> h{2e-1, 1e-1, 5e-2, 2.5e-2, 1e-2, 1e-3, 1e-4, 1e-5};
  return h;
}

/// Central differences of the SAA objective along w. The slope fit skips
/// steps whose error is within reach of the noise floor ~ 1e5 eps |F| / h;
/// the objective carries the inexactness of the state solves, well above
/// plain roundoff.
inline GradientCheck gradient_check(SaaInstance& inst, std::span<const double> u,
                                    std::span<const double> w,
                                    const std::vector<double>& steps = default_fd_steps()) {
  const auto& p = inst.problem();
  GradientCheck out;
  const double f0 = inst.objective(u);
  out.derivative = p.inner_p0(inst.gradient(u), w);
  std::vector<double> lx, ly;
  Vector up(u.size()), um(u.size());
  for (double h : steps) {
    for (std::size_t t = 0; t < u.size(); ++t) {
      up[t] = u[t] + h * w[t];
      um[t] = u[t] - h * w[t];
    }
    const double fd = (inst.objective(up) - inst.objective(um)) / (2.0 * h);
    const double err = std::abs(fd - out.derivative);
    out.best_relative = std::min(out.best_relative, err / std::abs(out.derivative));
    if (err > 1e5 * std::numeric_limits<double>::epsilon() * std::abs(f0) / h) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(err));
    }
  }
  out.points_used = lx.size();
  if (lx.size() >= 3) {
    const double m = static_cast<double>(lx.size());
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / m;
      my += ly[i] / m;
    }
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    out.slope = sxy / sxx;
  }
  return out;
}

/// Gradient checks along `directions` random smooth directions at large
/// random controls, where the cubic term is far from negligible.
inline std::vector<GradientCheck> gradient_checks(std::size_t n, std::size_t count,
                                                  std::size_t directions, std::uint64_t seed,
                                                  const RegularizerParams& params = {}) {
  PdeProblem problem(n);
  UniformSampler s(seed);
  SaaInstance inst(problem, draw_uniform(s, count), params);
  std::vector<GradientCheck> out;
  for (std::size_t d = 0; d < directions; ++d) {
    Vector u(problem.num_cells()), w(problem.num_cells());
    for (auto& x : u) x = 30.0 + 20.0 * s.next_symmetric();
    for (auto& x : w) x = 1.0 + 0.5 * s.next_symmetric();
    out.push_back(gradient_check(inst, u, w));
  }
  return out;
}

struct HessianCheck {
  double fd_relative = 0.0;        // ||(G(u+hw) - G(u-hw))/2h - Hw|| / ||Hw||
  double symmetry_relative = 0.0;  // |<Hw1,w2> - <Hw2,w1>| / max
};

inline HessianCheck hessian_check(SaaInstance& inst, std::span<const double> u,
                                  std::span<const double> w1, std::span<const double> w2,
                                  double h = 1e-4) {
  const auto& p = inst.problem();
  const P0Field h1 = inst.hvp(u, w1), h2 = inst.hvp(u, w2);
  const double a = p.inner_p0(h1, w2), b = p.inner_p0(h2, w1);
  HessianCheck out;
  out.symmetry_relative = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  Vector up(u.begin(), u.end()), um(u.begin(), u.end());
  for (std::size_t t = 0; t < u.size(); ++t) {
    up[t] += h * w1[t];
    um[t] -= h * w1[t];
  }
  const P0Field gp = inst.gradient(up), gm = inst.gradient(um);
  Vector diff(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) diff[t] = (gp[t] - gm[t]) / (2.0 * h) - h1[t];
  out.fd_relative = p.l2_p0(diff) / p.l2_p0(h1);
  return out;
}

inline std::vector<HessianCheck> hessian_checks(std::size_t n, std::size_t count,
                                                std::size_t probes, std::uint64_t seed) {
  PdeProblem problem(n);
  UniformSampler s(seed);
  SaaInstance inst(problem, draw_uniform(s, count), RegularizerParams{});
  std::vector<HessianCheck> out;
  const auto field = [&](double scale) {
    Vector v(problem.num_cells());
    for (auto& x : v) x = scale * s.next_symmetric();
    return v;
  };
  for (std::size_t k = 0; k < probes; ++k) {
    const Vector u = field(3.0), w1 = field(1.0), w2 = field(1.0);
    out.push_back(hessian_check(inst, u, w1, w2));
  }
  return out;
}

/// Stability estimates for random control pairs and random samples.
inline std::vector<StabilityReport> stability_checks(std::size_t n, std::size_t pairs,
                                                     std::uint64_t seed, double box = 10.0) {
  PdeProblem problem(n);
  UniformSampler s(seed);
  std::vector<StabilityReport> out;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto xi = s.next_param();
    Vector u1(problem.num_cells()), u2(problem.num_cells());
    for (auto& x : u1) x = box * s.next_symmetric();
    for (auto& x : u2) x = box * s.next_symmetric();
    out.push_back(check_stability(problem, u1, u2, xi));
  }
  return out;
}

struct HandValue {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  bool passed() const { return expected == actual; }
};

/// Planner formulas on the all-ones constants (c_q = 0, ||y_d|| = 0) and on
/// the unit toy inputs of the sample-size bounds.
inline std::vector<HandValue> planner_hand_values() {
  const ProblemConstants ones;
  const auto cr = compact_radius(ones);
  const auto as_double = [](const SampleSize& s) {
    return s.value ? static_cast<double>(*s.value) : NAN;
  };
  return {
      {"lipschitz_grad", 9.0, lipschitz_grad(ones)},
      {"compact_radius.diameter", 2.0, cr.diameter},
      {"compact_radius.radius", 8.0, cr.radius},
      {"tau", 4.0, tau_scripted(ones)},
      {"sample_size_expectation", 142.0,
       as_double(sample_size_expectation(1.0, 1.0, 1.0, 1.0, 1.0, 2, 1.0))},
      {"sample_size_tail", 48.0,
       as_double(sample_size_tail(1.0, 1.0, 1.0, 1.0, 0.0, 2, 1.0, 2.0 / std::numbers::e))},
  };
}

}  // namespace saa4pde
