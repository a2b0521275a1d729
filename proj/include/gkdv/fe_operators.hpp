// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gkdv/mesh.hpp"
#include "gkdv/quadrature.hpp"
#include "gkdv/sparse.hpp"

namespace gkdv {

/// Mesh-dependent operators: lumped masses m_i, consistent mass M,
/// first-derivative coupling C_ij = \int phi_i phi_j', and stiffness
/// K_ij = \int phi_i' phi_j'. M, C, K share one sparsity pattern (the
/// stencil), with explicit zeros where an integral vanishes.
struct FEOperators {
  std::vector<double> lumped_mass;
  SparseMatrix mass;
  SparseMatrix deriv;
  SparseMatrix stiffness;

  int size() const { return static_cast<int>(lumped_mass.size()); }

  /// Stencil of row i as a span over the shared pattern.
  const int* stencil_begin(int i) const { return mass.col_indices.data() + mass.row_offsets[i]; }
  const int* stencil_end(int i) const {
    return mass.col_indices.data() + mass.row_offsets[static_cast<size_t>(i) + 1];
  }
};

/// Assembles all operators with Gauss-Legendre quadrature of degree+1 points
/// per cell, exact for every polynomial integrand involved.
inline FEOperators assemble_operators(const Mesh& mesh) {
  const int I = mesh.dof_count();
  const int k = mesh.degree;
  const double h = mesh.cell_width();
  const QuadratureRule rule = gauss_legendre(k + 1);
  const int nq = static_cast<int>(rule.points.size());

  // Reference-cell integrals.
  std::array<std::array<double, 4>, 4> mass_ref{}, deriv_ref{}, stiff_ref{};
  std::array<double, 4> lump_ref{};
  std::array<double, 4> n{}, d{};
  for (int q = 0; q < nq; ++q) {
    lagrange_values(k, rule.points[q], n);
    lagrange_derivs(k, rule.points[q], d);
    const double w = rule.weights[q];
    for (int a = 0; a <= k; ++a) {
      lump_ref[a] += w * n[a];
      for (int b = 0; b <= k; ++b) {
        mass_ref[a][b] += w * n[a] * n[b];
        deriv_ref[a][b] += w * n[a] * d[b];
        stiff_ref[a][b] += w * d[a] * d[b];
      }
    }
  }

  std::vector<Triplet> tm, tc, tk;
  tm.reserve(static_cast<size_t>(mesh.num_cells) * (k + 1) * (k + 1));
  tc.reserve(tm.capacity());
  tk.reserve(tm.capacity());
  std::vector<double> lumped(static_cast<size_t>(I), 0.0);
  for (int c = 0; c < mesh.num_cells; ++c) {
    const auto& dofs = mesh.cell_to_dofs[c];
    for (int a = 0; a <= k; ++a) {
      lumped[dofs[a]] += h * lump_ref[a];
      for (int b = 0; b <= k; ++b) {
        // Jacobians: dx = h dxi, d/dx = (1/h) d/dxi.
        tm.push_back({dofs[a], dofs[b], h * mass_ref[a][b]});
        tc.push_back({dofs[a], dofs[b], deriv_ref[a][b]});
        tk.push_back({dofs[a], dofs[b], stiff_ref[a][b] / h});
      }
    }
  }

  FEOperators ops;
  ops.lumped_mass = std::move(lumped);
  ops.mass = SparseMatrix::from_triplets(I, I, std::move(tm));
  ops.deriv = SparseMatrix::from_triplets(I, I, std::move(tc));
  ops.stiffness = SparseMatrix::from_triplets(I, I, std::move(tk));
  for (double m : ops.lumped_mass)
    if (!(m > 0.0)) throw std::runtime_error("assemble_operators: non-positive lumped mass");
  return ops;
}

/// Weighted l2 norm sqrt(sum_i U_i^2 m_i).
inline double weighted_l2_norm(const StateVector& U, const FEOperators& ops) {
  if (U.size() != ops.lumped_mass.size())
    throw std::invalid_argument("weighted_l2_norm: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < U.size(); ++i) s += U[i] * U[i] * ops.lumped_mass[i];
  return std::sqrt(s);
}

/// Lumped-mass integral sum_i m_i U_i (the conserved discrete mass).
inline double discrete_mass(const StateVector& U, const FEOperators& ops) {
  double s = 0.0;
  for (size_t i = 0; i < U.size(); ++i) s += ops.lumped_mass[i] * U[i];
  return s;
}

/// True L2 inner product (u_h, v_h) via the consistent mass matrix.
inline double l2_inner(const StateVector& U, const StateVector& V, const FEOperators& ops) {
  Vector mv = matvec(ops.mass, V);
  return dot(U, mv);
}

/// Relative L-infinity error against an exact solution at time t, sampled at
/// the DOF nodes and the cell midpoints.
inline double relative_linf_error(const StateVector& U,
                                  const std::function<double(double, double)>& exact,
                                  const Mesh& mesh, double t) {
  double num = 0.0, den = 0.0;
  auto visit = [&](double x) {
    const double ue = exact(t, x);
    if (!std::isfinite(ue)) throw std::invalid_argument("relative_linf_error: non-finite exact value");
    num = std::max(num, std::abs(eval_fe(mesh, U, x) - ue));
    den = std::max(den, std::abs(ue));
  };
  for (double x : mesh.dof_coords) visit(x);
  const double h = mesh.cell_width();
  for (int c = 0; c < mesh.num_cells; ++c) visit(mesh.a + h * (c + 0.5));
  if (den == 0.0)
    throw std::invalid_argument("relative_linf_error: exact solution vanishes on the sample set");
  return num / den;
}

}  // namespace gkdv
