// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gkdv/fe_operators.hpp"
#include "gkdv/mesh.hpp"
#include "gkdv/sparse.hpp"

namespace gkdv {

enum class MassMode { lumped, consistent };

/// Assembled coupled (u,z) operator for the implicit dispersive update, with
/// a reusable factorization. `theta` is the coefficient multiplying the
/// dispersive bilinear forms in the u-row; the Euler update uses theta = tau,
/// the staged solves use theta = tau * (implicit diagonal).
///
/// Block structure in (U, Z) ordering:
///   [ Mass + theta*eps*c*K   -theta*eps*(K + c*C^T) ] [U]   [rhs]
///   [ K - c*C                 c*M - C^T             ] [Z] = [ 0 ]
struct DispersiveSystem {
  double theta = 0.0;
  double epsilon = 0.0;
  double c_stab = 0.0;
  MassMode mass_mode = MassMode::consistent;
  int dofs = 0;
  SparseMatrix blocks;
  Factorization lu;
};

inline DispersiveSystem assemble_dispersive(const Mesh& mesh, const FEOperators& ops, double tau,
                                            double epsilon, double c_stab, MassMode mode) {
  if (!(tau > 0.0)) throw std::invalid_argument("assemble_dispersive: tau must be positive");
  if (epsilon == 0.0) throw std::invalid_argument("assemble_dispersive: epsilon must be nonzero");
  if (!(c_stab > 0.0)) throw std::invalid_argument("assemble_dispersive: c_stab must be positive");
  const int I = ops.size();
  if (I != mesh.dof_count()) throw std::invalid_argument("assemble_dispersive: operator/mesh mismatch");

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(ops.mass.nnz()) * 4);
  const SparseMatrix& M = ops.mass;
  const SparseMatrix& C = ops.deriv;
  const SparseMatrix& K = ops.stiffness;
  for (int i = 0; i < I; ++i) {
    for (int p = M.row_offsets[i]; p < M.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = M.col_indices[p];
      const double mij = M.values[p];
      const double kij = K.values[p];
      const double cji = C.coeff(j, i);  // (C^T)_ij
      double uu = tau * epsilon * c_stab * kij;
      if (mode == MassMode::consistent) uu += mij;
      else if (i == j) uu += ops.lumped_mass[i];
      t.push_back({i, j, uu});
      t.push_back({i, j + I, -tau * epsilon * (kij + c_stab * cji)});
      t.push_back({i + I, j, kij - c_stab * C.values[p]});
      t.push_back({i + I, j + I, c_stab * mij - cji});
    }
  }

  DispersiveSystem sys;
  sys.theta = tau;
  sys.epsilon = epsilon;
  sys.c_stab = c_stab;
  sys.mass_mode = mode;
  sys.dofs = I;
  sys.blocks = SparseMatrix::from_triplets(2 * I, 2 * I, std::move(t));
  try {
    sys.lu = factor(sys.blocks);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("assemble_dispersive: coupled operator is singular");
  }
  return sys;
}

namespace detail {
/// Solves the coupled system for a given u-row right-hand side and checks the
/// residual of the solve.
inline std::pair<StateVector, StateVector> dispersive_solve_rhs(const DispersiveSystem& sys,
                                                                const Vector& rhs_u) {
  const int I = sys.dofs;
  Vector rhs(static_cast<size_t>(2 * I), 0.0);
  std::copy(rhs_u.begin(), rhs_u.end(), rhs.begin());
  const Vector x = sys.lu.solve(rhs);
  Vector back = matvec(sys.blocks, x);
  double rn = 0.0, bn = 0.0;
  for (int i = 0; i < 2 * I; ++i) {
    rn += (back[i] - rhs[i]) * (back[i] - rhs[i]);
    bn += rhs[i] * rhs[i];
  }
  if (bn > 0.0 && !(std::sqrt(rn) <= 1e-9 * std::sqrt(bn)))
    throw std::runtime_error("dispersive solve: residual " + std::to_string(std::sqrt(rn / bn)) +
                             " above tolerance");
  StateVector U(x.begin(), x.begin() + I);
  StateVector Z(x.begin() + I, x.end());
  return {std::move(U), std::move(Z)};
}
}  // namespace detail

/// One implicit dispersive update from the predicted state W; returns the new
/// state and the auxiliary variable.
inline std::pair<StateVector, StateVector> dispersive_update(const DispersiveSystem& sys,
                                                             const StateVector& W,
                                                             const FEOperators& ops) {
  if (static_cast<int>(W.size()) != sys.dofs)
    throw std::invalid_argument("dispersive_update: dimension mismatch");
  Vector rhs_u;
  if (sys.mass_mode == MassMode::consistent) {
    rhs_u = matvec(ops.mass, W);
  } else {
    rhs_u.resize(W.size());
    for (size_t i = 0; i < W.size(); ++i) rhs_u[i] = ops.lumped_mass[i] * W[i];
  }
  return detail::dispersive_solve_rhs(sys, rhs_u);
}

/// Factorized z-subsystem (c*M - C^T) z = (c*C - K) u, reusable across calls.
struct ZSystem {
  double c_stab = 0.0;
  SparseMatrix lhs;
  SparseMatrix rhs_op;  // c*C - K
  Factorization lu;
};

inline ZSystem build_z_system(const FEOperators& ops, double c_stab) {
  if (!(c_stab > 0.0)) throw std::invalid_argument("build_z_system: c_stab must be positive");
  const int I = ops.size();
  std::vector<Triplet> tl, tr;
  const SparseMatrix& M = ops.mass;
  const SparseMatrix& C = ops.deriv;
  const SparseMatrix& K = ops.stiffness;
  for (int i = 0; i < I; ++i)
    for (int p = M.row_offsets[i]; p < M.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = M.col_indices[p];
      tl.push_back({i, j, c_stab * M.values[p] - C.coeff(j, i)});
      tr.push_back({i, j, c_stab * C.values[p] - K.values[p]});
    }
  ZSystem z;
  z.c_stab = c_stab;
  z.lhs = SparseMatrix::from_triplets(I, I, std::move(tl));
  z.rhs_op = SparseMatrix::from_triplets(I, I, std::move(tr));
  z.lu = factor(z.lhs);
  return z;
}

inline StateVector solve_z(const ZSystem& zsys, const StateVector& U) {
  return zsys.lu.solve(matvec(zsys.rhs_op, U));
}

/// The dispersive operator tested against the basis: returns the vector with
/// entries (G(u_h), phi_i) where z_h(u_h) solves the auxiliary system.
inline Vector apply_G(const StateVector& U, double epsilon, const ZSystem& zsys,
                      const FEOperators& ops) {
  const StateVector Z = solve_z(zsys, U);
  const Vector KZ = matvec(ops.stiffness, Z);
  const Vector KU = matvec(ops.stiffness, U);
  Vector CtZ(U.size(), 0.0);
  const SparseMatrix& C = ops.deriv;
  for (int i = 0; i < C.rows; ++i)
    for (int p = C.row_offsets[i]; p < C.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      CtZ[C.col_indices[p]] += C.values[p] * Z[i];
  Vector G(U.size());
  for (size_t i = 0; i < U.size(); ++i)
    G[i] = -epsilon * KZ[i] - epsilon * zsys.c_stab * (CtZ[i] - KU[i]);
  return G;
}

inline Vector apply_G(const StateVector& U, double epsilon, double c_stab, const FEOperators& ops) {
  return apply_G(U, epsilon, build_z_system(ops, c_stab), ops);
}

/// Solves the stage-l dispersive update
///   M U + tau*gamma G(U) = M W - tau sum_k deltas[k] G_history[k]
/// for U (consistent mass). `sys` must be assembled with theta = tau*gamma
/// when gamma is nonzero; for gamma = 0 the update reduces to a consistent
/// mass solve and `sys` may be empty.
inline std::pair<StateVector, StateVector> stage_dispersive_solve_full(
    const StateVector& W, const std::vector<Vector>& G_history, double tau,
    const std::vector<double>& deltas, double gamma, const DispersiveSystem* sys,
    const FEOperators& ops, double cg_tol = 1e-12, int cg_max_iter = 400) {
  if (G_history.size() != deltas.size())
    throw std::invalid_argument("stage_dispersive_solve: inconsistent history");
  Vector rhs = matvec(ops.mass, W);
  for (size_t k = 0; k < deltas.size(); ++k)
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] -= tau * deltas[k] * G_history[k][i];
  if (gamma != 0.0) {
    if (!sys || sys->mass_mode != MassMode::consistent ||
        std::abs(sys->theta - tau * gamma) > 1e-14 * std::max(1.0, std::abs(tau * gamma)))
      throw std::invalid_argument("stage_dispersive_solve: system does not match tau*gamma");
    return detail::dispersive_solve_rhs(*sys, rhs);
  }
  StateVector U = cg_solve(ops.mass, rhs, cg_tol, cg_max_iter, &W);
  return {std::move(U), StateVector{}};
}

inline StateVector stage_dispersive_solve(const StateVector& W, const std::vector<Vector>& G_history,
                                          double tau, const std::vector<double>& deltas, double gamma,
                                          double epsilon, double c_stab, const Mesh& mesh,
                                          const FEOperators& ops) {
  if (gamma != 0.0) {
    const DispersiveSystem sys =
        assemble_dispersive(mesh, ops, tau * gamma, epsilon, c_stab, MassMode::consistent);
    return stage_dispersive_solve_full(W, G_history, tau, deltas, gamma, &sys, ops).first;
  }
  return stage_dispersive_solve_full(W, G_history, tau, deltas, gamma, nullptr, ops).first;
}

/// Quadrature-exact value of || z_h - d/dx u_h ||_{L2}^2.
inline double z_defect_norm_sq(const StateVector& U, const StateVector& Z, const FEOperators& ops) {
  const Vector MZ = matvec(ops.mass, Z);
  const Vector CU = matvec(ops.deriv, U);
  const Vector KU = matvec(ops.stiffness, U);
  double s = 0.0;
  for (size_t i = 0; i < U.size(); ++i) s += Z[i] * MZ[i] - 2.0 * Z[i] * CU[i] + U[i] * KU[i];
  return s;
}

}  // namespace gkdv
