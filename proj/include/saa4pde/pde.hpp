#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/fem.hpp"
#include "saa4pde/linear_solvers.hpp"
#include "saa4pde/mesh.hpp"
#include "saa4pde/quadrature.hpp"
#include "saa4pde/random_fields.hpp"

namespace saa4pde {

/// Monotone nonlinearity q with its first two derivatives.
struct Nonlinearity {
  double (*q)(double) = nullptr;
  double (*dq)(double) = nullptr;
  double (*d2q)(double) = nullptr;
  bool active = false;

  static Nonlinearity cubic() {
    return {[](double t) { return t * t * t; }, [](double t) { return 3.0 * t * t; },
            [](double t) { return 6.0 * t; }, true};
  }
  static Nonlinearity disabled() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; },
            [](double) { return 0.0; }, false};
  }
};

struct PdeOptions {
  Nonlinearity nonlinearity = Nonlinearity::cubic();
  LinearSolverKind linear_solver = LinearSolverKind::banded_cholesky;
  double state_tol = 1e-10;
  std::size_t max_newton = 50;
  std::size_t max_halvings = 30;
};

/// Per-sample operator data: everything the state equation needs for one
/// parameter xi. The stiffness matrix is represented by its element-averaged
/// coefficient (exact for P1 with the three-point rule); the control coupling
/// by its three local entries per cell.
struct SampleOperators {
  ParamVector xi{};
  Vector kappa_avg;                          // per cell
  std::vector<std::array<double, 3>> coupling;  // per cell, int_T g phi_a
  Vector load;                               // reduced, int b phi_v
};

struct StateSolution {
  P1Field y;  // reduced (interior vertices)
  std::size_t newton_iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

struct AdjointSolution {
  P1Field z;  // reduced
  double residual = 0.0;
};

/// Symmetric positive definite system matrix together with its solver.
class SpdOperator {
 public:
  SpdOperator() = default;
  SpdOperator(CsrMatrix matrix, LinearSolverKind kind)
      : matrix_(std::move(matrix)), kind_(kind) {
    if (matrix_.rows() <= 9) kind_ = LinearSolverKind::dense;
    if (kind_ == LinearSolverKind::banded_cholesky) chol_.factor(matrix_);
  }

  const CsrMatrix& matrix() const { return matrix_; }

  Vector solve(std::span<const double> rhs) const {
    if (kind_ == LinearSolverKind::banded_cholesky) return chol_.solve(rhs);
    return solve_spd(matrix_, rhs, kind_);
  }

  /// Euclidean residual ||A x - b||_2.
  double residual(std::span<const double> x, std::span<const double> b) const {
    Vector ax = matrix_ * x;
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += (ax[i] - b[i]) * (ax[i] - b[i]);
    return std::sqrt(s);
  }

 private:
  CsrMatrix matrix_;
  LinearSolverKind kind_ = LinearSolverKind::banded_cholesky;
  BandedCholesky chol_;
};

/// Discretized state equation
///   -div(kappa(xi) grad y) + q(y) = b(xi) + g(xi) u,  y = 0 on the boundary,
/// and tracking functional 1/2 ||y - y_d||^2 on one structured mesh.
///
/// Immutable after construction; every method is const and may be called
/// concurrently for different samples.
class PdeProblem {
 public:
  PdeProblem(std::size_t n, FieldModel model = FieldModel::case_study_model(),
             PdeOptions options = {})
      : mesh_(build_mesh(n)),
        reduction_(mesh_),
        norms_(mesh_),
        model_(std::move(model)),
        options_(options) {
    const std::size_t nt = mesh_.num_triangles();
    areas_.resize(nt);
    unit_stiffness_.resize(nt);
    local_ids_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      areas_[t] = mesh_.signed_area(t);
      unit_stiffness_[t] = element_stiffness(mesh_, t);
      for (int a = 0; a < 3; ++a)
        local_ids_[t][a] = reduction_.reduced_index(mesh_.triangles[t][a]);
    }
    // reduced sparsity pattern and element-to-slot map
    std::vector<Triplet> pattern;
    for (std::size_t t = 0; t < nt; ++t)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (local_ids_[t][a] != npos && local_ids_[t][b] != npos)
            pattern.push_back({local_ids_[t][a], local_ids_[t][b], 0.0});
    pattern_ = CsrMatrix(reduction_.reduced_size(), reduction_.reduced_size(),
                         std::move(pattern));
    slots_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          slots_[t][a][b] = (local_ids_[t][a] != npos && local_ids_[t][b] != npos)
                                ? pattern_.find(local_ids_[t][a], local_ids_[t][b])
                                : npos;
    mass_reduced_ = reduction_.reduce(norms_.mass());
    laplace_reduced_ = SpdOperator(reduction_.reduce(norms_.laplace()),
                                   LinearSolverKind::banded_cholesky);
    set_target(model_.yd);
  }

  PdeProblem(const PdeProblem&) = delete;
  PdeProblem& operator=(const PdeProblem&) = delete;

  const StructuredMesh& mesh() const { return mesh_; }
  const DirichletReduction& reduction() const { return reduction_; }
  const FieldNorms& norms() const { return norms_; }
  const FieldModel& model() const { return model_; }
  const PdeOptions& options() const { return options_; }
  std::size_t num_cells() const { return mesh_.num_triangles(); }
  std::size_t num_states() const { return reduction_.reduced_size(); }
  std::span<const double> cell_areas() const { return areas_; }
  const CsrMatrix& mass_reduced() const { return mass_reduced_; }
  /// Full-vertex L2 projection of the target onto P1.
  const Vector& target_projection() const { return yd_projection_; }

  /// Replace the tracking target (full P1 projection recomputed).
  template <class Fn>
  void set_target(Fn&& yd) {
    model_.yd = yd;
    const Vector load = assemble_load(mesh_, yd);
    yd_load_reduced_ = reduction_.reduce(load);
    yd_projection_ = cg_solve(norms_.mass(), load, 1e-14, 100000).x;
    target_energy_ = 0.5 * dot(yd_projection_, norms_.mass() * yd_projection_);
  }

  SampleOperators assemble(const ParamVector& xi) const {
    SampleOperators ops;
    ops.xi = xi;
    const std::size_t nt = num_cells();
    ops.kappa_avg.resize(nt);
    ops.coupling.resize(nt);
    ops.load.assign(num_states(), 0.0);
    const auto& rule = quad_degree2();
    for (std::size_t t = 0; t < nt; ++t) {
      double kavg = 0.0;
      std::array<double, 3> bl{};
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2 x = map_to_triangle(mesh_, t, rule.points[q]);
        const double kv = model_.kappa(x, xi);
        if (!(kv > 0.0) || !std::isfinite(kv)) {
          std::ostringstream msg;
          msg << "kappa must be positive and finite; got " << kv << " at (" << x.x1
              << ", " << x.x2 << ") in triangle " << t;
          throw std::domain_error(msg.str());
        }
        const double w = rule.weights[q];
        kavg += w * kv;
        const double gv = model_.g(x, xi);
        const double bv = model_.b(x, xi);
        for (int a = 0; a < 3; ++a) {
          const double phi = rule.points[q][a];
          ops.coupling[t][a] += areas_[t] * w * gv * phi;
          bl[a] += areas_[t] * w * bv * phi;
        }
      }
      ops.kappa_avg[t] = kavg;
      for (int a = 0; a < 3; ++a)
        if (local_ids_[t][a] != npos) ops.load[local_ids_[t][a]] += bl[a];
    }
    return ops;
  }

  /// Reduced load B(xi) u.
  Vector apply_coupling(const SampleOperators& ops, std::span<const double> u) const {
    Vector out(num_states(), 0.0);
    for (std::size_t t = 0; t < num_cells(); ++t)
      for (int a = 0; a < 3; ++a)
        if (local_ids_[t][a] != npos) out[local_ids_[t][a]] += ops.coupling[t][a] * u[t];
    return out;
  }

  /// Riesz representative in the P0 L2 product of v -> <z, B v>, i.e.
  /// (B^T z)_T / |T|.
  P0Field coupling_riesz(const SampleOperators& ops, std::span<const double> z) const {
    P0Field out(num_cells(), 0.0);
    for (std::size_t t = 0; t < num_cells(); ++t) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        if (local_ids_[t][a] != npos) s += ops.coupling[t][a] * z[local_ids_[t][a]];
      out[t] = s / areas_[t];
    }
    return out;
  }

  /// Reduced stiffness matrix A(xi).
  CsrMatrix stiffness(const SampleOperators& ops) const {
    CsrMatrix k = pattern_;
    auto vals = k.values();
    for (std::size_t t = 0; t < num_cells(); ++t)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (slots_[t][a][b] != npos)
            vals[slots_[t][a][b]] += ops.kappa_avg[t] * unit_stiffness_[t][a][b];
    return k;
  }

  /// Newton matrix A(xi) + Q_y(y), Q_y with the six-point rule.
  CsrMatrix jacobian(const SampleOperators& ops, std::span<const double> y) const {
    CsrMatrix k = stiffness(ops);
    if (!options_.nonlinearity.active) return k;
    auto vals = k.values();
    const auto& rule = quad_degree4();
    for (std::size_t t = 0; t < num_cells(); ++t) {
      const auto yl = local_values(t, y);
      std::array<std::array<double, 3>, 3> loc{};
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& lam = rule.points[q];
        const double yq = lam[0] * yl[0] + lam[1] * yl[1] + lam[2] * yl[2];
        const double c = areas_[t] * rule.weights[q] * options_.nonlinearity.dq(yq);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) loc[a][b] += c * lam[a] * lam[b];
      }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (slots_[t][a][b] != npos) vals[slots_[t][a][b]] += loc[a][b];
    }
    return k;
  }

  /// Reduced load of q(y).
  Vector nonlinear_load(std::span<const double> y) const {
    Vector out(num_states(), 0.0);
    if (!options_.nonlinearity.active) return out;
    const auto& rule = quad_degree4();
    for (std::size_t t = 0; t < num_cells(); ++t) {
      const auto yl = local_values(t, y);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& lam = rule.points[q];
        const double yq = lam[0] * yl[0] + lam[1] * yl[1] + lam[2] * yl[2];
        const double c = areas_[t] * rule.weights[q] * options_.nonlinearity.q(yq);
        for (int a = 0; a < 3; ++a)
          if (local_ids_[t][a] != npos) out[local_ids_[t][a]] += c * lam[a];
      }
    }
    return out;
  }

  /// Reduced load of q''(y) z w (second-order adjoint term).
  Vector curvature_load(std::span<const double> y, std::span<const double> z,
                        std::span<const double> w) const {
    Vector out(num_states(), 0.0);
    if (!options_.nonlinearity.active) return out;
    const auto& rule = quad_degree4();
    for (std::size_t t = 0; t < num_cells(); ++t) {
      const auto yl = local_values(t, y);
      const auto zl = local_values(t, z);
      const auto wl = local_values(t, w);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& lam = rule.points[q];
        const double yq = lam[0] * yl[0] + lam[1] * yl[1] + lam[2] * yl[2];
        const double zq = lam[0] * zl[0] + lam[1] * zl[1] + lam[2] * zl[2];
        const double wq = lam[0] * wl[0] + lam[1] * wl[1] + lam[2] * wl[2];
        const double c =
            areas_[t] * rule.weights[q] * options_.nonlinearity.d2q(yq) * zq * wq;
        for (int a = 0; a < 3; ++a)
          if (local_ids_[t][a] != npos) out[local_ids_[t][a]] += c * lam[a];
      }
    }
    return out;
  }

  /// R(y) = A y + Q(y) - b - B u.
  Vector state_residual(const SampleOperators& ops, const CsrMatrix& stiff,
                        std::span<const double> forcing, std::span<const double> y) const {
    Vector r = stiff * y;
    const Vector qy = nonlinear_load(y);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += qy[i] - forcing[i];
    (void)ops;
    return r;
  }

  /// Damped Newton for the state equation starting from `initial` (zero when
  /// empty). At least `min_iterations` steps are taken, which matters for warm
  /// starts already under the tolerance. Throws ConvergenceError on failure.
  StateSolution solve_state(const SampleOperators& ops, std::span<const double> u,
                            std::span<const double> initial = {},
                            std::size_t min_iterations = 0) const {
    StateSolution sol;
    sol.y = initial.empty() ? Vector(num_states(), 0.0)
                            : Vector(initial.begin(), initial.end());
    const CsrMatrix stiff = stiffness(ops);
    Vector forcing = apply_coupling(ops, u);
    for (std::size_t i = 0; i < forcing.size(); ++i) forcing[i] += ops.load[i];

    Vector r = state_residual(ops, stiff, forcing, sol.y);
    double rnorm = norm2(r);
    sol.history.push_back(rnorm);
    while (rnorm > options_.state_tol || sol.newton_iterations < min_iterations) {
      if (sol.newton_iterations >= options_.max_newton)
        throw ConvergenceError("solve_state: Newton did not converge in " +
                                   std::to_string(options_.max_newton) + " iterations",
                               sol.history);
      SpdOperator jac(jacobian(ops, sol.y), options_.linear_solver);
      Vector step = jac.solve(r);
      double t = 1.0;
      bool accepted = false;
      Vector trial(sol.y.size());
      for (std::size_t h = 0; h <= options_.max_halvings; ++h, t *= 0.5) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = sol.y[i] - t * step[i];
        Vector rt = state_residual(ops, stiff, forcing, trial);
        const double rtn = norm2(rt);
        if (rtn <= (1.0 - 1e-4 * t) * rnorm) {
          sol.y.swap(trial);
          r.swap(rt);
          rnorm = rtn;
          accepted = true;
          break;
        }
      }
      ++sol.newton_iterations;
      if (!accepted) {
        if (rnorm <= options_.state_tol) break;  // at the roundoff floor already
        throw ConvergenceError("solve_state: line search failed", sol.history);
      }
      sol.history.push_back(rnorm);
    }
    sol.residual = rnorm;
    return sol;
  }

  /// Right-hand side of the adjoint equation, -(M y - M Pi y_d).
  Vector adjoint_rhs(std::span<const double> y) const {
    Vector rhs = mass_reduced_ * y;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = yd_load_reduced_[i] - rhs[i];
    return rhs;
  }

  AdjointSolution solve_adjoint(const SpdOperator& jac, std::span<const double> y) const {
    const Vector rhs = adjoint_rhs(y);
    AdjointSolution sol;
    sol.z = jac.solve(rhs);
    sol.residual = jac.residual(sol.z, rhs);
    return sol;
  }

  AdjointSolution solve_adjoint(const SampleOperators& ops, std::span<const double> y) const {
    return solve_adjoint(SpdOperator(jacobian(ops, y), options_.linear_solver), y);
  }

  /// 1/2 ||y - Pi y_d||^2_{L2} for a reduced state y.
  double tracking(std::span<const double> y) const {
    const Vector my = mass_reduced_ * y;
    return 0.5 * dot(y, my) - dot(y, yd_load_reduced_) + target_energy_;
  }

  /// -g(xi) z interpolated at the vertices (full vertex set).
  P1Field gradient_h1(const SampleOperators& ops, std::span<const double> z) const {
    const Vector zf = reduction_.expand(z);
    P1Field out(mesh_.num_vertices(), 0.0);
    for (std::size_t v = 0; v < out.size(); ++v)
      if (zf[v] != 0.0) out[v] = -model_.g(mesh_.vertices[v], ops.xi) * zf[v];
    return out;
  }

  /// Smallest element-averaged coefficient: the coercivity constant of the
  /// assembled stiffness matrix relative to the unit Laplacian.
  static double discrete_kappa_min(const SampleOperators& ops) {
    return *std::min_element(ops.kappa_avg.begin(), ops.kappa_avg.end());
  }

  /// Discrete H^{-1} norm of a reduced load vector f: sqrt(f^T K1^{-1} f).
  double dual_norm(std::span<const double> f) const {
    const Vector w = laplace_reduced_.solve(f);
    return std::sqrt(std::max(0.0, dot(w, f)));
  }

  double h1_semi_reduced(std::span<const double> y) const {
    return norms_.h1_semi(reduction_.expand(y));
  }
  double l2_p0(std::span<const double> u) const { return norms_.l2_p0(u); }
  double inner_p0(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += areas_[t] * a[t] * b[t];
    return s;
  }

  static constexpr std::size_t npos = DirichletReduction::npos;

 private:
  std::array<double, 3> local_values(std::size_t t, std::span<const double> y) const {
    std::array<double, 3> v{};
    for (int a = 0; a < 3; ++a)
      if (local_ids_[t][a] != npos) v[a] = y[local_ids_[t][a]];
    return v;
  }

  StructuredMesh mesh_;
  DirichletReduction reduction_;
  FieldNorms norms_;
  FieldModel model_;
  PdeOptions options_;
  Vector areas_;
  std::vector<std::array<std::array<double, 3>, 3>> unit_stiffness_;
  std::vector<std::array<std::size_t, 3>> local_ids_;
  std::vector<std::array<std::array<std::size_t, 3>, 3>> slots_;
  CsrMatrix pattern_;
  CsrMatrix mass_reduced_;
  Vector yd_load_reduced_;
  Vector yd_projection_;
  double target_energy_ = 0.0;
  SpdOperator laplace_reduced_;
};

/// State, adjoint and their linearization at one control for one sample.
/// Caches the most recent point so that gradient and Hessian-vector products
/// at the same control reuse one state solve and one factorization.
class SampleSolver {
 public:
  SampleSolver(const PdeProblem& problem, SampleOperators ops)
      : problem_(&problem), ops_(std::move(ops)) {}

  const SampleOperators& operators() const { return ops_; }
  const PdeProblem& problem() const { return *problem_; }

  /// Ensure state/adjoint are current at u. Warm-starts Newton from the
  /// previous state.
  void update(std::span<const double> u) {
    if (valid_ && std::equal(u.begin(), u.end(), u_.begin(), u_.end())) return;
    const auto& p = *problem_;
    StateSolution st = valid_ ? p.solve_state(ops_, u, state_.y, 1) : p.solve_state(ops_, u);
    state_ = std::move(st);
    jac_ = SpdOperator(p.jacobian(ops_, state_.y), p.options().linear_solver);
    adjoint_ = p.solve_adjoint(jac_, state_.y);
    u_.assign(u.begin(), u.end());
    valid_ = true;
  }

  void invalidate() { valid_ = false; }

  double objective(std::span<const double> u) {
    update(u);
    return problem_->tracking(state_.y);
  }

  P0Field gradient(std::span<const double> u) {
    update(u);
    P0Field g = problem_->coupling_riesz(ops_, adjoint_.z);
    for (double& v : g) v = -v;
    return g;
  }

  P1Field gradient_h1(std::span<const double> u) {
    update(u);
    return problem_->gradient_h1(ops_, adjoint_.z);
  }

  /// Reduced Hessian applied to w, as a P0 Riesz representative.
  P0Field hvp(std::span<const double> u, std::span<const double> w) {
    update(u);
    const auto& p = *problem_;
    const Vector dy = jac_.solve(p.apply_coupling(ops_, w));
    Vector rhs = p.mass_reduced() * dy;
    const Vector curv = p.curvature_load(state_.y, adjoint_.z, dy);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -rhs[i] - curv[i];
    const Vector dz = jac_.solve(rhs);
    P0Field out = p.coupling_riesz(ops_, dz);
    for (double& v : out) v = -v;
    return out;
  }

  const StateSolution& state() const { return state_; }
  const AdjointSolution& adjoint() const { return adjoint_; }

 private:
  const PdeProblem* problem_;
  SampleOperators ops_;
  bool valid_ = false;
  Vector u_;
  StateSolution state_;
  AdjointSolution adjoint_;
  SpdOperator jac_;
};

/// Friedrichs constant of the unit square/cube, 1/(pi sqrt(d)).
inline double friedrichs_constant(int d) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("friedrichs_constant: d must be 2 or 3");
  return 1.0 / (std::numbers::pi * std::sqrt(static_cast<double>(d)));
}

/// sup|g| + Lip(g) for g(., xi), estimated on a uniform grid of the square.
template <class Fn>
double estimate_c01_norm(Fn&& f, std::size_t grid = 100) {
  const double h = 1.0 / static_cast<double>(grid);
  std::vector<double> vals((grid + 1) * (grid + 1));
  double sup = 0.0;
  for (std::size_t j = 0; j <= grid; ++j)
    for (std::size_t i = 0; i <= grid; ++i) {
      const double v = f(Point2{static_cast<double>(i) * h, static_cast<double>(j) * h});
      vals[j * (grid + 1) + i] = v;
      sup = std::max(sup, std::abs(v));
    }
  double lip = 0.0;
  for (std::size_t j = 0; j <= grid; ++j)
    for (std::size_t i = 0; i <= grid; ++i) {
      const double v = vals[j * (grid + 1) + i];
      if (i < grid) lip = std::max(lip, std::abs(vals[j * (grid + 1) + i + 1] - v) / h);
      if (j < grid) lip = std::max(lip, std::abs(vals[(j + 1) * (grid + 1) + i] - v) / h);
    }
  return sup + lip;
}

/// Both sides of the stability estimates
///   ||S(u)||_{H1_0} <= (1/kmin) ||b||_{H^-1} + (C_D/kmin) ||g||_{C01} ||u||
///   ||S(u2) - S(u1)||_{H1_0} <= (C_D/kmin) ||g||_{C01} ||u2 - u1||
/// evaluated with the discrete coercivity constant, the discrete H^{-1} norm of
/// b (one Poisson solve) and a grid estimate of ||g||_{C01}.
struct StabilityReport {
  double kappa_min = 0.0;
  double b_dual_norm = 0.0;
  double g_c01 = 0.0;
  double bound_lhs = 0.0;      // ||S(u1)||_{H1_0}
  double bound_rhs = 0.0;
  double lipschitz_lhs = 0.0;  // ||S(u2) - S(u1)||_{H1_0}
  double lipschitz_rhs = 0.0;
  bool bound_satisfied = false;
  bool lipschitz_satisfied = false;
};

inline StabilityReport check_stability(const PdeProblem& problem, std::span<const double> u1,
                                       std::span<const double> u2, const ParamVector& xi,
                                       std::optional<double> g_norm = std::nullopt) {
  const SampleOperators ops = problem.assemble(xi);
  StabilityReport rep;
  rep.kappa_min = PdeProblem::discrete_kappa_min(ops);
  rep.b_dual_norm = problem.dual_norm(ops.load);
  rep.g_c01 = g_norm ? *g_norm : estimate_c01_norm([&](const Point2& x) {
    return problem.model().g(x, xi);
  });
  const double cd = friedrichs_constant(2);
  const auto s1 = problem.solve_state(ops, u1);
  const auto s2 = problem.solve_state(ops, u2);
  Vector diff(s1.y.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s2.y[i] - s1.y[i];
  Vector du(u1.size());
  for (std::size_t t = 0; t < du.size(); ++t) du[t] = u2[t] - u1[t];
  rep.bound_lhs = problem.h1_semi_reduced(s1.y);
  rep.bound_rhs = rep.b_dual_norm / rep.kappa_min +
                  cd / rep.kappa_min * rep.g_c01 * problem.l2_p0(u1);
  rep.lipschitz_lhs = problem.h1_semi_reduced(diff);
  rep.lipschitz_rhs = cd / rep.kappa_min * rep.g_c01 * problem.l2_p0(du);
  rep.bound_satisfied = rep.bound_lhs <= rep.bound_rhs;
  rep.lipschitz_satisfied = rep.lipschitz_lhs <= rep.lipschitz_rhs;
  return rep;
}

}  // namespace saa4pde
