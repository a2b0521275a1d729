// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities: dense linear-algebra oracles independent of the
// sparse kernels, quadrature evaluation of weak forms independent of the
// assembly path, and random state generators.

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gkdv/fe_operators.hpp"
#include "gkdv/mesh.hpp"
#include "gkdv/quadrature.hpp"
#include "gkdv/sparse.hpp"

namespace testing_support {

using gkdv::Mesh;
using gkdv::StateVector;

using DenseMatrix = std::vector<std::vector<double>>;

inline std::vector<double> dense_matvec(const DenseMatrix& A, const std::vector<double>& x) {
  std::vector<double> y(A.size(), 0.0);
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
  return y;
}

/// Dense Gaussian elimination with partial pivoting; the oracle for sparse
/// factor/solve.
inline std::vector<double> dense_solve(DenseMatrix A, std::vector<double> b) {
  const int n = static_cast<int>(A.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (std::abs(A[piv][k]) < 1e-300) throw std::runtime_error("dense_solve: singular");
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (int i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

inline std::mt19937_64 make_rng(unsigned seed) { return std::mt19937_64(seed); }

inline StateVector random_state(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  StateVector u(static_cast<size_t>(n));
  for (auto& v : u) v = dist(rng);
  return u;
}

/// Smooth random periodic state from a handful of Fourier modes.
inline StateVector random_smooth_state(std::mt19937_64& rng, const Mesh& mesh, int modes = 4,
                                       double amplitude = 1.0) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> ac(static_cast<size_t>(modes)), as(static_cast<size_t>(modes));
  for (int m = 0; m < modes; ++m) {
    ac[m] = dist(rng) / (1 + m * m);
    as[m] = dist(rng) / (1 + m * m);
  }
  StateVector u(mesh.dof_coords.size());
  const double w = 2.0 * M_PI / mesh.length();
  for (size_t i = 0; i < u.size(); ++i) {
    double v = 0.0;
    for (int m = 0; m < modes; ++m) {
      const double ph = w * (m + 1) * (mesh.dof_coords[i] - mesh.a);
      v += ac[m] * std::cos(ph) + as[m] * std::sin(ph);
    }
    u[i] = amplitude * v;
  }
  return u;
}

/// Quadrature evaluation of \int_D g(u_h, u_h', z_h, z_h', phi_i, phi_i') for
/// the weak forms, independent of the assembled matrices. Uses a 5-point
/// Gauss rule per cell (exact well beyond every integrand used in tests).
struct WeakFormOracle {
  const Mesh& mesh;
  gkdv::QuadratureRule rule = gkdv::gauss_legendre(5);

  explicit WeakFormOracle(const Mesh& m) : mesh(m) {}

  /// Entries (f, phi_i) where f(x) combines the FE fields evaluated at x.
  template <typename F>
  std::vector<double> test_against_basis(F&& integrand) const {
    const int I = mesh.dof_count();
    const int k = mesh.degree;
    const double h = mesh.cell_width();
    std::vector<double> out(static_cast<size_t>(I), 0.0);
    std::array<double, 4> n{}, d{};
    for (int c = 0; c < mesh.num_cells; ++c) {
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const double xi = rule.points[q];
        const double x = mesh.a + h * (c + xi);
        gkdv::lagrange_values(k, xi, n);
        gkdv::lagrange_derivs(k, xi, d);
        const double w = rule.weights[q] * h;
        for (int m = 0; m <= k; ++m) {
          const int dof = mesh.cell_to_dofs[c][m];
          out[dof] += w * integrand(x, n[m], d[m] / h);
        }
      }
    }
    return out;
  }

  /// \int_D g(x) dx by the same rule.
  template <typename G>
  double integrate(G&& g) const {
    const double h = mesh.cell_width();
    double s = 0.0;
    for (int c = 0; c < mesh.num_cells; ++c)
      for (size_t q = 0; q < rule.points.size(); ++q)
        s += rule.weights[q] * h * g(mesh.a + h * (c + rule.points[q]));
    return s;
  }
};

}  // namespace testing_support
