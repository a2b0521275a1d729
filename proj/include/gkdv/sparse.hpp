// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace gkdv {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed-row sparse matrix with sorted, unique column indices per row.
/// Duplicate triplets are summed on construction.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets;  // size rows+1
  std::vector<int> col_indices;
  std::vector<double> values;

  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("SparseMatrix: negative shape");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(static_cast<size_t>(rows) + 1, 0);
    for (size_t p = 0; p < entries.size();) {
      const int r = entries[p].row;
      const int c = entries[p].col;
      if (r < 0 || r >= rows || c < 0 || c >= cols)
        throw std::invalid_argument("SparseMatrix: triplet index out of range");
      double v = 0.0;
      while (p < entries.size() && entries[p].row == r && entries[p].col == c) v += entries[p++].value;
      if (!std::isfinite(v)) throw std::invalid_argument("SparseMatrix: non-finite entry");
      m.col_indices.push_back(c);
      m.values.push_back(v);
      ++m.row_offsets[static_cast<size_t>(r) + 1];
    }
    for (int r = 0; r < rows; ++r) m.row_offsets[static_cast<size_t>(r) + 1] += m.row_offsets[r];
    return m;
  }

  int nnz() const { return static_cast<int>(values.size()); }

  /// Value at (i,j); zero when outside the stored pattern.
  double coeff(int i, int j) const {
    const int* lo = col_indices.data() + row_offsets[i];
    const int* hi = col_indices.data() + row_offsets[static_cast<size_t>(i) + 1];
    const int* it = std::lower_bound(lo, hi, j);
    if (it == hi || *it != j) return 0.0;
    return values[static_cast<size_t>(it - col_indices.data())];
  }

  /// Mutable reference into the stored pattern; throws if (i,j) is not stored.
  double& at(int i, int j) {
    const int* lo = col_indices.data() + row_offsets[i];
    const int* hi = col_indices.data() + row_offsets[static_cast<size_t>(i) + 1];
    const int* it = std::lower_bound(lo, hi, j);
    if (it == hi || *it != j) throw std::out_of_range("SparseMatrix::at outside pattern");
    return values[static_cast<size_t>(it - col_indices.data())];
  }

  SparseMatrix pattern_copy() const {
    SparseMatrix m = *this;
    std::fill(m.values.begin(), m.values.end(), 0.0);
    return m;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> d(rows, std::vector<double>(cols, 0.0));
    for (int i = 0; i < rows; ++i)
      for (int p = row_offsets[i]; p < row_offsets[static_cast<size_t>(i) + 1]; ++p)
        d[i][col_indices[p]] = values[p];
    return d;
  }
};

inline Vector matvec(const SparseMatrix& A, const Vector& x) {
  if (static_cast<int>(x.size()) != A.cols) throw std::invalid_argument("matvec: shape mismatch");
  Vector y(static_cast<size_t>(A.rows), 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int p = A.row_offsets[i]; p < A.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      s += A.values[p] * x[A.col_indices[p]];
    y[i] = s;
  }
  return y;
}

inline void matvec_into(const SparseMatrix& A, const Vector& x, Vector& y) {
  y.resize(static_cast<size_t>(A.rows));
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int p = A.row_offsets[i]; p < A.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      s += A.values[p] * x[A.col_indices[p]];
    y[i] = s;
  }
}

namespace detail {
inline Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& A) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.values.size());
  for (int i = 0; i < A.rows; ++i)
    for (int p = A.row_offsets[i]; p < A.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      t.emplace_back(i, A.col_indices[p], A.values[p]);
  Eigen::SparseMatrix<double> m(A.rows, A.cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}
}  // namespace detail

/// Reusable direct solve handle for a square nonsingular matrix.
class Factorization {
 public:
  Factorization() = default;

  explicit Factorization(const SparseMatrix& A) {
    if (A.rows != A.cols) throw std::invalid_argument("factor: matrix not square");
    impl_ = std::make_shared<Impl>();
    impl_->n = A.rows;
    impl_->mat = detail::to_eigen(A);
    impl_->lu.compute(impl_->mat);
    if (impl_->lu.info() != Eigen::Success)
      throw std::runtime_error("factor: matrix is numerically singular");
  }

  bool valid() const { return impl_ != nullptr; }
  int size() const { return impl_ ? impl_->n : 0; }

  Vector solve(const Vector& b) const {
    if (!impl_) throw std::logic_error("Factorization: empty handle");
    if (static_cast<int>(b.size()) != impl_->n) throw std::invalid_argument("solve: shape mismatch");
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), impl_->n);
    Eigen::VectorXd x = impl_->lu.solve(bm);
    if (impl_->lu.info() != Eigen::Success) throw std::runtime_error("solve: back substitution failed");
    return Vector(x.data(), x.data() + impl_->n);
  }

 private:
  struct Impl {
    int n = 0;
    Eigen::SparseMatrix<double> mat;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  };
  std::shared_ptr<Impl> impl_;
};

inline Factorization factor(const SparseMatrix& A) { return Factorization(A); }

inline Vector solve(const Factorization& f, const Vector& b) { return f.solve(b); }

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vector& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// systems. Stops at relative residual `tol`; throws on non-convergence with
/// the final residual in the message.
inline Vector cg_solve(const SparseMatrix& A, const Vector& b, double tol, int max_iter,
                       const Vector* warm_start = nullptr) {
  if (A.rows != A.cols) throw std::invalid_argument("cg_solve: matrix not square");
  if (static_cast<int>(b.size()) != A.rows) throw std::invalid_argument("cg_solve: shape mismatch");
  const int n = A.rows;
  const double bnorm = norm2(b);
  Vector x = warm_start ? *warm_start : Vector(static_cast<size_t>(n), 0.0);
  if (warm_start && static_cast<int>(warm_start->size()) != n)
    throw std::invalid_argument("cg_solve: warm start shape mismatch");
  if (bnorm == 0.0) return Vector(static_cast<size_t>(n), 0.0);

  Vector inv_diag(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    if (d <= 0.0) throw std::invalid_argument("cg_solve: non-positive diagonal");
    inv_diag[i] = 1.0 / d;
  }

  Vector r(static_cast<size_t>(n)), z(static_cast<size_t>(n)), p(static_cast<size_t>(n)), Ap;
  matvec_into(A, x, Ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  double rnorm = norm2(r);
  if (rnorm <= tol * bnorm) return x;
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    matvec_into(A, p, Ap);
    const double alpha = rz / dot(p, Ap);
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    rnorm = norm2(r);
    if (rnorm <= tol * bnorm) return x;
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw std::runtime_error("cg_solve: no convergence after " + std::to_string(max_iter) +
                           " iterations, relative residual " + std::to_string(rnorm / bnorm));
}

}  // namespace gkdv
