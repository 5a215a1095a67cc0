#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/sparse.hpp"

namespace saa4pde {

/// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}

  /// Residual norms recorded up to the failure; the last entry is the final
  /// residual.
  const std::vector<double>& history() const { return history_; }
  double residual() const { return history_.empty() ? NAN : history_.back(); }

 private:
  std::vector<double> history_;
};

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD `a`.
/// Stops when ||b - A x||_2 <= tol_rel * ||b||_2.
inline CgResult cg_solve(const CsrMatrix& a, std::span<const double> b,
                         double tol_rel = 1e-12, std::size_t max_iter = 10000) {
  const std::size_t n = b.size();
  if (a.rows() != n || a.cols() != n)
    throw std::invalid_argument("cg_solve: dimension mismatch");
  CgResult out;
  out.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return out;

  Vector inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.diagonal(i);
    if (!(d > 0.0)) throw std::domain_error("cg_solve: nonpositive diagonal");
    inv_diag[i] = 1.0 / d;
  }
  Vector r(b.begin(), b.end());
  Vector z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rnorm = bnorm;
  std::vector<double> history{rnorm};
  const double target = tol_rel * bnorm;

  while (rnorm > target) {
    if (out.iterations >= max_iter)
      throw ConvergenceError("cg_solve: no convergence in " +
                                 std::to_string(max_iter) + " iterations",
                             std::move(history));
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw ConvergenceError("cg_solve: matrix is not positive definite",
                             std::move(history));
    const double step = rz / pap;
    axpy(step, p, out.x);
    axpy(-step, ap, r);
    ++out.iterations;
    rnorm = norm2(r);
    history.push_back(rnorm);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  // recompute the true residual so the reported value is not the recursive one
  Vector ax = a * out.x;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res += (b[i] - ax[i]) * (b[i] - ax[i]);
  out.residual = std::sqrt(res);
  return out;
}

/// Cholesky factorization in band storage.
///
/// Factors a symmetric positive definite CSR matrix whose nonzeros lie within
/// a half-bandwidth `bw` of the diagonal (detected automatically). Storage
/// and work are O(n bw) and O(n bw^2); on the lexicographically ordered
/// structured mesh bw equals the number of subdivisions per axis.
class BandedCholesky {
 public:
  BandedCholesky() = default;

  explicit BandedCholesky(const CsrMatrix& a) { factor(a); }

  void factor(const CsrMatrix& a) {
    if (a.rows() != a.cols())
      throw std::invalid_argument("BandedCholesky: matrix is not square");
    n_ = a.rows();
    bw_ = 0;
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
        if (ci[k] < r) bw_ = std::max(bw_, r - ci[k]);
    const std::size_t width = bw_ + 1;
    band_.assign(n_ * width, 0.0);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
        if (ci[k] <= r) band_[r * width + (ci[k] + bw_ - r)] = va[k];

    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      double* li = &band_[i * width + bw_ - i];  // li[j] == L(i, j)
      for (std::size_t j = first; j <= i; ++j) {
        const double* lj = &band_[j * width + bw_ - j];
        const std::size_t kstart = std::max(first, j > bw_ ? j - bw_ : 0);
        double s = li[j];
        for (std::size_t k = kstart; k < j; ++k) s -= li[k] * lj[k];
        if (j == i) {
          if (!(s > 0.0))
            throw std::domain_error(
                "BandedCholesky: matrix is not positive definite (pivot " +
                std::to_string(i) + ")");
          li[i] = std::sqrt(s);
        } else {
          li[j] = s / lj[j];
        }
      }
    }
  }

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  void solve_in_place(std::span<double> x) const {
    if (x.size() != n_)
      throw std::invalid_argument("BandedCholesky: dimension mismatch");
    const std::size_t width = bw_ + 1;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* li = &band_[i * width + bw_ - i];
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      double s = x[i];
      for (std::size_t k = first; k < i; ++k) s -= li[k] * x[k];
      x[i] = s / li[i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const double* li = &band_[ii * width + bw_ - ii];
      const double xi = x[ii] / li[ii];
      x[ii] = xi;
      const std::size_t first = ii > bw_ ? ii - bw_ : 0;
      for (std::size_t k = first; k < ii; ++k) x[k] -= li[k] * xi;
    }
  }

  Vector solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  Vector band_;
};

/// Dense row-major matrix, used for small systems and test oracles.
struct DenseMatrix {
  std::size_t n = 0;
  Vector data;

  explicit DenseMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }

  static DenseMatrix from_csr(const CsrMatrix& a) {
    DenseMatrix d(a.rows());
    for (const auto& t : a.triplets()) d(t.row, t.col) += t.value;
    return d;
  }
};

/// Gaussian elimination with partial pivoting.
inline Vector dense_solve(DenseMatrix a, Vector b) {
  const std::size_t n = a.n;
  if (b.size() != n) throw std::invalid_argument("dense_solve: size mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw std::domain_error("dense_solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * b[j];
    b[ii] = s / a(ii, ii);
  }
  return b;
}

enum class LinearSolverKind { banded_cholesky, cg_jacobi, dense };

/// Solve an SPD system with the selected backend. Systems of at most 9
/// unknowns (n <= 4 meshes) always take the dense path.
inline Vector solve_spd(const CsrMatrix& a, std::span<const double> b,
                        LinearSolverKind kind = LinearSolverKind::banded_cholesky,
                        double cg_tol = 1e-12) {
  if (a.rows() <= 9) kind = LinearSolverKind::dense;
  switch (kind) {
    case LinearSolverKind::dense:
      return dense_solve(DenseMatrix::from_csr(a), Vector(b.begin(), b.end()));
    case LinearSolverKind::cg_jacobi:
      return cg_solve(a, b, cg_tol).x;
    case LinearSolverKind::banded_cholesky:
    default:
      return BandedCholesky(a).solve(b);
  }
}

}  // namespace saa4pde
