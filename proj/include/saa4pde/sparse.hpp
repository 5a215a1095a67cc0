#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "saa4pde/mesh.hpp"

namespace saa4pde {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; duplicate triplets are summed on construction.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
    for (const auto& t : triplets)
      if (t.row >= rows || t.col >= cols)
        throw std::out_of_range("CsrMatrix: triplet index out of range");
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    for (const auto& t : triplets) {
      if (row_ptr_[t.row + 1] > 0 && col_idx_.back() == t.col) {
        values_.back() += t.value;
        continue;
      }
      col_idx_.push_back(t.col);
      values_.push_back(t.value);
      ++row_ptr_[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (row, col) in values(), or npos when structurally zero.
  std::size_t find(std::size_t row, std::size_t col) const {
    const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return npos;
    return static_cast<std::size_t>(it - col_idx_.begin());
  }

  double entry(std::size_t row, std::size_t col) const {
    const auto pos = find(row, col);
    return pos == npos ? 0.0 : values_[pos];
  }

  double diagonal(std::size_t row) const { return entry(row, row); }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        s += values_[k] * x[col_idx_[k]];
      y[r] = s;
    }
  }

  Vector operator*(std::span<const double> x) const {
    Vector y(rows_);
    multiply(x, y);
    return y;
  }

  Vector transpose_multiply(std::span<const double> x) const {
    Vector y(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        y[col_idx_[k]] += values_[k] * x[r];
    return y;
  }

  /// Largest |a_ij - a_ji| relative to the largest |a_ij|.
  double symmetry_defect() const {
    if (rows_ != cols_) return INFINITY;
    double scale = 0.0;
    double defect = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        scale = std::max(scale, std::abs(values_[k]));
        defect = std::max(defect, std::abs(values_[k] - entry(col_idx_[k], r)));
      }
    return scale > 0.0 ? defect / scale : 0.0;
  }

  CsrMatrix scaled(double factor) const {
    CsrMatrix out = *this;
    for (double& v : out.values_) v *= factor;
    return out;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        out.push_back({r, col_idx_[k], values_[k]});
    return out;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace saa4pde
