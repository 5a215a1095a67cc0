#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "saa4pde/linear_solvers.hpp"
#include "saa4pde/mesh.hpp"
#include "saa4pde/quadrature.hpp"
#include "saa4pde/sparse.hpp"

namespace saa4pde {

/// Physical coordinates of a barycentric point on triangle t.
inline Point2 map_to_triangle(const StructuredMesh& mesh, std::size_t t,
                              const std::array<double, 3>& bary) {
  const auto& tri = mesh.triangles[t];
  Point2 p;
  for (int a = 0; a < 3; ++a) {
    p.x1 += bary[a] * mesh.vertices[tri[a]].x1;
    p.x2 += bary[a] * mesh.vertices[tri[a]].x2;
  }
  return p;
}

/// Unit-coefficient P1 element stiffness matrix: area * grad(l_a) . grad(l_b).
inline std::array<std::array<double, 3>, 3> element_stiffness(
    const StructuredMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const double area = mesh.signed_area(t);
  std::array<std::array<double, 2>, 3> grad{};
  for (int a = 0; a < 3; ++a) {
    const auto& p1 = mesh.vertices[tri[(a + 1) % 3]];
    const auto& p2 = mesh.vertices[tri[(a + 2) % 3]];
    grad[a] = {(p1.x2 - p2.x2) / (2.0 * area), (p2.x1 - p1.x1) / (2.0 * area)};
  }
  std::array<std::array<double, 3>, 3> k{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      k[a][b] = area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
  return k;
}

/// Quadrature average of `f` over triangle t.
template <class Fn>
double triangle_average(const StructuredMesh& mesh, std::size_t t, Fn&& f,
                        const QuadRule& rule = quad_degree2()) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * f(map_to_triangle(mesh, t, rule.points[q]));
  return s;
}

/// P1 stiffness matrix for -div(coeff grad y), coefficient sampled with the
/// three-point rule. Since P1 gradients are constant per element, only the
/// element average of coeff enters.
template <class Coeff>
CsrMatrix assemble_stiffness(const StructuredMesh& mesh, Coeff&& coeff) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.num_triangles());
  const auto& rule = quad_degree2();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double avg = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = map_to_triangle(mesh, t, rule.points[q]);
      const double c = coeff(x);
      if (!std::isfinite(c)) {
        std::ostringstream msg;
        msg << "assemble_stiffness: non-finite coefficient at (" << x.x1 << ", "
            << x.x2 << ") in triangle " << t;
        throw std::domain_error(msg.str());
      }
      avg += rule.weights[q] * c;
    }
    const auto k = element_stiffness(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.push_back({tri[a], tri[b], avg * k[a][b]});
  }
  return CsrMatrix(mesh.num_vertices(), mesh.num_vertices(), std::move(trip));
}

inline CsrMatrix assemble_mass_p1(const StructuredMesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.push_back({tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0)});
  }
  return CsrMatrix(mesh.num_vertices(), mesh.num_vertices(), std::move(trip));
}

/// Rectangular (vertices x triangles) matrix of int_T g u phi_v for P0 u.
template <class Fn>
CsrMatrix assemble_control_coupling(const StructuredMesh& mesh, Fn&& g) {
  std::vector<Triplet> trip;
  trip.reserve(3 * mesh.num_triangles());
  const auto& rule = quad_degree2();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    const auto& tri = mesh.triangles[t];
    std::array<double, 3> local{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double gv = g(map_to_triangle(mesh, t, rule.points[q]));
      for (int a = 0; a < 3; ++a)
        local[a] += area * rule.weights[q] * gv * rule.points[q][a];
    }
    for (int a = 0; a < 3; ++a) trip.push_back({tri[a], t, local[a]});
  }
  return CsrMatrix(mesh.num_vertices(), mesh.num_triangles(), std::move(trip));
}

template <class Fn>
Vector assemble_load(const StructuredMesh& mesh, Fn&& f) {
  Vector load(mesh.num_vertices(), 0.0);
  const auto& rule = quad_degree2();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    const auto& tri = mesh.triangles[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double fv = f(map_to_triangle(mesh, t, rule.points[q]));
      for (int a = 0; a < 3; ++a)
        load[tri[a]] += area * rule.weights[q] * fv * rule.points[q][a];
    }
  }
  return load;
}

/// Elimination of the boundary vertices (homogeneous Dirichlet data).
class DirichletReduction {
 public:
  explicit DirichletReduction(const StructuredMesh& mesh)
      : full_size_(mesh.num_vertices()), to_reduced_(mesh.num_vertices(), npos) {
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      if (mesh.boundary_mask[v]) continue;
      to_reduced_[v] = interior_.size();
      interior_.push_back(v);
    }
    if (interior_.empty())
      throw std::invalid_argument("DirichletReduction: mesh has no interior vertex");
  }

  std::size_t full_size() const { return full_size_; }
  std::size_t reduced_size() const { return interior_.size(); }
  std::span<const std::size_t> interior() const { return interior_; }
  /// Reduced index of vertex v, or npos on the boundary.
  std::size_t reduced_index(std::size_t v) const { return to_reduced_[v]; }

  CsrMatrix reduce(const CsrMatrix& a) const {
    if (a.rows() != full_size_ || a.cols() != full_size_)
      throw std::invalid_argument("DirichletReduction: matrix size mismatch");
    std::vector<Triplet> trip;
    for (const auto& t : a.triplets()) {
      const auto r = to_reduced_[t.row];
      const auto c = to_reduced_[t.col];
      if (r != npos && c != npos) trip.push_back({r, c, t.value});
    }
    return CsrMatrix(reduced_size(), reduced_size(), std::move(trip));
  }

  Vector reduce(std::span<const double> full) const {
    if (full.size() != full_size_)
      throw std::invalid_argument("DirichletReduction: vector size mismatch");
    Vector out(reduced_size());
    for (std::size_t k = 0; k < interior_.size(); ++k) out[k] = full[interior_[k]];
    return out;
  }

  Vector expand(std::span<const double> reduced) const {
    if (reduced.size() != reduced_size())
      throw std::invalid_argument("DirichletReduction: vector size mismatch");
    Vector out(full_size_, 0.0);
    for (std::size_t k = 0; k < interior_.size(); ++k) out[interior_[k]] = reduced[k];
    return out;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t full_size_;
  std::vector<std::size_t> to_reduced_;
  std::vector<std::size_t> interior_;
};

/// Discrete norms of P1 (full vertex set) and P0 fields on one mesh.
class FieldNorms {
 public:
  explicit FieldNorms(const StructuredMesh& mesh)
      : areas_(mesh.num_triangles()),
        mass_(assemble_mass_p1(mesh)),
        laplace_(assemble_stiffness(mesh, [](const Point2&) { return 1.0; })) {
    for (std::size_t t = 0; t < areas_.size(); ++t) areas_[t] = mesh.signed_area(t);
  }

  double l2_p1(std::span<const double> y) const {
    return std::sqrt(std::max(0.0, dot(y, mass_ * y)));
  }
  double l2_p0(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) s += areas_[t] * u[t] * u[t];
    return std::sqrt(s);
  }
  double h1_semi(std::span<const double> y) const {
    return std::sqrt(std::max(0.0, dot(y, laplace_ * y)));
  }
  /// (||v||_{L2}^2 + ||grad v||_{L2}^2)^{1/2}
  double h1_full(std::span<const double> y) const {
    const double a = l2_p1(y);
    const double b = h1_semi(y);
    return std::sqrt(a * a + b * b);
  }
  static double linf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  const CsrMatrix& mass() const { return mass_; }
  const CsrMatrix& laplace() const { return laplace_; }

 private:
  Vector areas_;
  CsrMatrix mass_;
  CsrMatrix laplace_;
};

/// Nodal interpolant of f on the full vertex set.
template <class Fn>
Vector interpolate_p1(const StructuredMesh& mesh, Fn&& f) {
  Vector out(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) out[v] = f(mesh.vertices[v]);
  return out;
}

}  // namespace saa4pde
