#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/parallel.hpp"
#include "saa4pde/pde.hpp"
#include "saa4pde/prox.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde {

/// A per-sample solve failed; the message names the sample index.
class SampleError : public std::runtime_error {
 public:
  SampleError(std::size_t index, const std::string& what)
      : std::runtime_error("sample " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// The sample-average problem over a frozen sample set
///   min_u  (1/N) sum_i J(u, xi_i) + (alpha/2) ||u||^2 + psi(u).
///
/// Holds one SampleSolver per sample (operators assembled once, state and
/// adjoint cached at the most recent control). Per-sample work runs on
/// `threads` workers; sample results are summed in index order so every
/// quantity is independent of the thread count. Not safe for concurrent
/// calls on the same instance. `problem` must outlive the instance.
class SaaInstance {
 public:
  SaaInstance(const PdeProblem& problem, std::vector<ParamVector> samples,
              RegularizerParams params, unsigned threads = 1)
      : problem_(&problem), samples_(std::move(samples)), params_(params), threads_(threads) {
    if (samples_.empty()) throw std::invalid_argument("SaaInstance: need at least one sample");
    params_.validate();
    std::vector<SampleOperators> ops(samples_.size());
    for_each_sample([&](std::size_t i) { ops[i] = problem_->assemble(samples_[i]); });
    solvers_.reserve(ops.size());
    for (auto& o : ops) solvers_.emplace_back(problem, std::move(o));
  }

  std::size_t size() const { return samples_.size(); }
  const PdeProblem& problem() const { return *problem_; }
  const RegularizerParams& params() const { return params_; }
  const std::vector<ParamVector>& samples() const { return samples_; }
  unsigned threads() const { return threads_; }
  void set_threads(unsigned t) { threads_ = t; }
  std::size_t num_cells() const { return problem_->num_cells(); }

  /// (1/N) sum_i J(u, xi_i).
  double objective(std::span<const double> u) {
    std::vector<double> vals(size());
    for_each_sample([&](std::size_t i) { vals[i] = solvers_[i].objective(u); });
    double s = 0.0;
    for (double v : vals) s += v;
    return s / static_cast<double>(size());
  }

  /// objective + (alpha/2)||u||^2 + gamma ||u||_{L1}; the box is not checked.
  double total_cost(std::span<const double> u) {
    double l1 = 0.0;
    const auto areas = problem_->cell_areas();
    for (std::size_t t = 0; t < u.size(); ++t) l1 += areas[t] * std::abs(u[t]);
    return objective(u) + 0.5 * params_.alpha * problem_->inner_p0(u, u) + params_.gamma * l1;
  }

  P0Field gradient(std::span<const double> u) {
    return mean_of([&](std::size_t i) { return solvers_[i].gradient(u); }, num_cells());
  }

  P0Field hvp(std::span<const double> u, std::span<const double> w) {
    return mean_of([&](std::size_t i) { return solvers_[i].hvp(u, w); }, num_cells());
  }

  /// Mean of the vertex interpolants of -g(xi_i) z_i (full vertex set).
  P1Field gradient_h1(std::span<const double> u) {
    return mean_of([&](std::size_t i) { return solvers_[i].gradient_h1(u); },
                   problem_->mesh().num_vertices());
  }

  /// Drop all cached states, forcing cold solves at the next evaluation.
  void invalidate() {
    for (auto& s : solvers_) s.invalidate();
  }

  std::size_t newton_iterations_last() const {
    std::size_t s = 0;
    for (const auto& sv : solvers_) s += sv.state().newton_iterations;
    return s;
  }

 private:
  template <class Body>
  void for_each_sample(Body&& body) {
    parallel_for(samples_.size(), threads_, [&](std::size_t i) {
      try {
        body(i);
      } catch (const ConvergenceError& e) {
        throw SampleError(i, e.what());
      } catch (const std::domain_error& e) {
        throw SampleError(i, e.what());
      }
    });
  }

  template <class PerSample>
  Vector mean_of(PerSample&& f, std::size_t length) {
    std::vector<Vector> parts(size());
    for_each_sample([&](std::size_t i) { parts[i] = f(i); });
    Vector out(length, 0.0);
    for (const auto& p : parts)
      for (std::size_t k = 0; k < length; ++k) out[k] += p[k];
    const double inv = 1.0 / static_cast<double>(size());
    for (double& v : out) v *= inv;
    return out;
  }

  const PdeProblem* problem_;
  std::vector<ParamVector> samples_;
  RegularizerParams params_;
  unsigned threads_;
  std::vector<SampleSolver> solvers_;
};

enum class SolverStatus { converged, max_outer, stalled, failed };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_outer: return "max_outer";
    case SolverStatus::stalled: return "stalled";
    case SolverStatus::failed: return "failed";
  }
  return "unknown";
}

struct NewtonOptions {
  double tol = 1e-9;
  std::size_t max_outer = 50;
  std::size_t max_cg = 500;
  /// Fixed relative CG tolerance; negative selects min(0.5, sqrt(||Phi||)).
  double cg_rtol = -1.0;
  double armijo = 1e-4;
  std::size_t max_halvings = 12;
  std::size_t max_fallback = 20;
  std::size_t power_iterations = 12;
};

struct SolverReport {
  SolverStatus status = SolverStatus::failed;
  std::size_t outer_iterations = 0;
  std::vector<double> residual_history;  // ||Phi(v_k)||, k = 0, 1, ...
  std::vector<std::size_t> cg_iterations;
  std::vector<std::size_t> active_sizes;    // cells with prox derivative 0
  std::vector<std::size_t> inactive_sizes;  // cells with prox derivative 1
  std::size_t fallback_steps = 0;
  double verified_residual = NAN;  // from a cold re-evaluation at the result
  double wall_seconds = 0.0;
  std::string message;

  bool converged() const { return status == SolverStatus::converged; }
};

struct SaaSolution {
  P0Field v;  // normal-map variable
  P0Field u;  // prox(v)
  SolverReport report;
};

namespace detail {

inline void axpy_into(Vector& y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace detail

/// Semismooth Newton-CG on the normal map Phi(v) = G(prox(v)) + alpha v.
///
/// The generalized Jacobian is H D + alpha I with D = diag(prox'(v)) and H
/// the reduced Hessian at prox(v). Splitting cells into I (D = 1) and A
/// (D = 0), the step solves (H_II + alpha I) d_I = -Phi_I by CG in the
/// area-weighted product (truncated on negative curvature) and then sets
/// d_A = -(Phi_A + (H d_I)_A) / alpha. Steps are globalized by backtracking
/// on ||Phi||; if that stalls, v - s Phi with s = 1/(L_est + alpha) is tried.
inline SaaSolution solve_semismooth_newton(SaaInstance& inst, std::span<const double> v0 = {},
                                           const NewtonOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const auto& prm = inst.params();
  const auto& prob = inst.problem();
  const std::size_t m = inst.num_cells();
  const double alpha = prm.alpha;
  const auto norm = [&](std::span<const double> x) { return std::sqrt(prob.inner_p0(x, x)); };

  SaaSolution sol;
  SolverReport& rep = sol.report;
  sol.v = v0.empty() ? Vector(m, 0.0) : Vector(v0.begin(), v0.end());
  if (sol.v.size() != m) throw std::invalid_argument("solve_semismooth_newton: v0 size");

  const auto residual_at = [&](const Vector& v, Vector& u_out) {
    u_out = prox_field(v, prm);
    Vector r = inst.gradient(u_out);
    detail::axpy_into(r, alpha, v);
    return r;
  };
  const auto finish = [&](SolverStatus s, std::string msg) {
    rep.status = s;
    rep.message = std::move(msg);
    sol.u = prox_field(sol.v, prm);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
  };

  Vector u;
  Vector phi;
  try {
    phi = residual_at(sol.v, u);
  } catch (const SampleError& e) {
    return finish(SolverStatus::failed, e.what());
  }
  double phin = norm(phi);
  rep.residual_history.push_back(phin);

  try {
    while (phin > opt.tol) {
      if (rep.outer_iterations >= opt.max_outer)
        return finish(SolverStatus::max_outer, "maximum number of outer iterations reached");

      std::vector<char> inactive(m);
      std::size_t n_inactive = 0;
      for (std::size_t t = 0; t < m; ++t) {
        inactive[t] = prox_derivative(sol.v[t], prm) ? 1 : 0;
        n_inactive += inactive[t];
      }
      rep.inactive_sizes.push_back(n_inactive);
      rep.active_sizes.push_back(m - n_inactive);

      // CG on the inactive block; vectors live on all cells with zeros on A
      Vector d(m, 0.0), hd(m, 0.0);
      Vector r(m, 0.0);
      for (std::size_t t = 0; t < m; ++t)
        if (inactive[t]) r[t] = -phi[t];
      const double rhs_norm = norm(r);
      std::size_t cg_its = 0;
      if (rhs_norm > 0.0) {
        const double forcing = opt.cg_rtol >= 0.0 ? opt.cg_rtol : std::min(0.5, std::sqrt(phin));
        Vector p = r;
        double rr = prob.inner_p0(r, r);
        while (cg_its < opt.max_cg) {
          Vector hp = inst.hvp(u, p);
          Vector ap(m, 0.0);
          for (std::size_t t = 0; t < m; ++t)
            if (inactive[t]) ap[t] = hp[t] + alpha * p[t];
          const double pap = prob.inner_p0(p, ap);
          ++cg_its;
          if (!(pap > 0.0)) {
            if (cg_its == 1) {  // negative curvature at once: use the gradient direction
              d = p;
              hd = hp;
            }
            break;
          }
          const double a = rr / pap;
          detail::axpy_into(d, a, p);
          detail::axpy_into(hd, a, hp);
          detail::axpy_into(r, -a, ap);
          const double rr_new = prob.inner_p0(r, r);
          if (std::sqrt(rr_new) <= forcing * rhs_norm) break;
          const double beta = rr_new / rr;
          rr = rr_new;
          for (std::size_t t = 0; t < m; ++t) p[t] = r[t] + beta * p[t];
        }
      }
      rep.cg_iterations.push_back(cg_its);
      for (std::size_t t = 0; t < m; ++t)
        if (!inactive[t]) d[t] = -(phi[t] + hd[t]) / alpha;

      // backtracking on ||Phi||
      bool accepted = false;
      double step = 1.0;
      Vector v_trial(m), u_trial, phi_trial;
      for (std::size_t h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
        for (std::size_t t = 0; t < m; ++t) v_trial[t] = sol.v[t] + step * d[t];
        phi_trial = residual_at(v_trial, u_trial);
        const double tn = norm(phi_trial);
        if (tn <= (1.0 - opt.armijo * step) * phin) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // fallback: fixed-step residual descent with a Lipschitz estimate of H
        if (rep.fallback_steps >= opt.max_fallback)
          return finish(SolverStatus::stalled, "fallback step budget exhausted");
        Vector w(m, 1.0);
        double lest = 0.0;
        for (std::size_t k = 0; k < opt.power_iterations; ++k) {
          const double wn = norm(w);
          for (double& x : w) x /= wn;
          w = inst.hvp(u, w);
          lest = norm(w);
          if (lest == 0.0) break;
        }
        const double s = 1.0 / (lest + alpha);
        for (std::size_t t = 0; t < m; ++t) v_trial[t] = sol.v[t] - s * phi[t];
        phi_trial = residual_at(v_trial, u_trial);
        ++rep.fallback_steps;
        if (!(norm(phi_trial) < phin)) {
          // leave the cache at the current iterate before giving up
          phi = residual_at(sol.v, u);
          return finish(SolverStatus::stalled, "no decrease along the fallback step");
        }
      }
      sol.v.swap(v_trial);
      u.swap(u_trial);
      phi.swap(phi_trial);
      phin = norm(phi);
      rep.residual_history.push_back(phin);
      ++rep.outer_iterations;
    }
  } catch (const SampleError& e) {
    return finish(SolverStatus::failed, e.what());
  }

  // independent check from cold state solves
  inst.invalidate();
  Vector ucheck;
  rep.verified_residual = norm(residual_at(sol.v, ucheck));
  return finish(SolverStatus::converged, "");
}

/// H1 membership test of the continuous representative of the normal-map
/// variable, (1/alpha) mean_i g(xi_i) z_i at u = prox(v).
struct CompactSetCheck {
  bool passed = false;
  double norm = 0.0;
  double radius = 0.0;
};

inline CompactSetCheck compact_set_check(SaaInstance& inst, std::span<const double> v,
                                         double radius) {
  const P0Field u = prox_field(v, inst.params());
  P1Field rep = inst.gradient_h1(u);
  for (double& x : rep) x *= -1.0 / inst.params().alpha;
  CompactSetCheck c;
  c.norm = inst.problem().norms().h1_full(rep);
  c.radius = radius;
  c.passed = c.norm <= radius;
  return c;
}

/// ||grad F_N(0)||_{L_inf} for N uniform samples drawn with `seed`.
inline double gamma_max_estimate(std::uint64_t seed, std::size_t n = 64, std::size_t count = 10,
                                 FieldModel model = FieldModel::case_study_model(),
                                 PdeOptions options = {}, unsigned threads = 1) {
  PdeProblem problem(n, std::move(model), options);
  UniformSampler sampler(seed);
  SaaInstance inst(problem, draw_uniform(sampler, count), RegularizerParams{}, threads);
  const P0Field g = inst.gradient(Vector(problem.num_cells(), 0.0));
  double m = 0.0;
  for (double x : g) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace saa4pde
