#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace saa4pde {

using Vector = std::vector<double>;
/// Coefficients of a continuous piecewise-linear field, one per mesh vertex
/// (or one per interior vertex once Dirichlet-reduced).
using P1Field = Vector;
/// Coefficients of a piecewise-constant field, one per triangle.
using P0Field = Vector;

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Uniform right-triangle mesh of the unit square.
///
/// Each of the n*n squares is split along its lower-left to upper-right
/// diagonal. Vertex (i, j) (i along x1, j along x2) has index j*(n+1)+i.
/// Square (i, j) contributes triangles 2*(j*n+i) (below the diagonal) and
/// 2*(j*n+i)+1 (above), both counter-clockwise.
struct StructuredMesh {
  std::size_t n = 0;
  std::vector<Point2> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<bool> boundary_mask;
  double cell_area = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double h() const { return 1.0 / static_cast<double>(n); }

  std::size_t vertex_index(std::size_t i, std::size_t j) const {
    return j * (n + 1) + i;
  }

  Point2 centroid(std::size_t t) const {
    const auto& tri = triangles[t];
    Point2 c;
    for (auto v : tri) {
      c.x1 += vertices[v].x1 / 3.0;
      c.x2 += vertices[v].x2 / 3.0;
    }
    return c;
  }

  double signed_area(std::size_t t) const {
    const auto& [a, b, c] = triangles[t];
    const auto& pa = vertices[a];
    const auto& pb = vertices[b];
    const auto& pc = vertices[c];
    return 0.5 * ((pb.x1 - pa.x1) * (pc.x2 - pa.x2) -
                  (pc.x1 - pa.x1) * (pb.x2 - pa.x2));
  }
};

inline StructuredMesh build_mesh(std::size_t n, int dimension = 2) {
  if (dimension != 2)
    throw std::invalid_argument("build_mesh: only d = 2 is supported");
  if (n == 0) throw std::invalid_argument("build_mesh: n must be positive");

  StructuredMesh mesh;
  mesh.n = n;
  const double h = 1.0 / static_cast<double>(n);
  mesh.vertices.reserve((n + 1) * (n + 1));
  mesh.boundary_mask.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      // i == n is set exactly to 1 so boundary coordinates are exact
      mesh.vertices.push_back({i == n ? 1.0 : static_cast<double>(i) * h,
                               j == n ? 1.0 : static_cast<double>(j) * h});
      mesh.boundary_mask.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  mesh.triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v00 = mesh.vertex_index(i, j);
      const std::size_t v10 = mesh.vertex_index(i + 1, j);
      const std::size_t v01 = mesh.vertex_index(i, j + 1);
      const std::size_t v11 = mesh.vertex_index(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.cell_area = 0.5 * h * h;
  return mesh;
}

}  // namespace saa4pde
