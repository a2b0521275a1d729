// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gkdv/fe_operators.hpp"
#include "gkdv/flux.hpp"
#include "gkdv/sparse.hpp"

namespace gkdv {

/// Symmetric graph viscosity on the mesh stencil. Off-diagonal entries are
/// the wave-speed bounds scaled by |C_ij|; the diagonal stores the negative
/// off-diagonal row sum and is excluded from CFL sums.
struct GraphViscosity {
  SparseMatrix d;  // same pattern as the FE operators
};

inline GraphViscosity compute_graph_viscosity(const StateVector& U, const FluxModel& flux,
                                              const FEOperators& ops) {
  if (static_cast<int>(U.size()) != ops.size())
    throw std::invalid_argument("compute_graph_viscosity: dimension mismatch");
  GraphViscosity gv;
  gv.d = ops.deriv.pattern_copy();
  const SparseMatrix& C = ops.deriv;
  for (int i = 0; i < C.rows; ++i) {
    for (int p = C.row_offsets[i]; p < C.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = C.col_indices[p];
      if (j <= i) continue;  // fill (i,j) and (j,i) together
      const double lam_ij = lambda_max(flux, U[i], U[j]);
      const double lam_ji = lambda_max(flux, U[j], U[i]);
      const double dij = std::max(lam_ij * std::abs(C.values[p]), lam_ji * std::abs(C.coeff(j, i)));
      gv.d.values[p] = dij;
      gv.d.at(j, i) = dij;
    }
  }
  for (int i = 0; i < C.rows; ++i) {
    double row = 0.0;
    for (int p = gv.d.row_offsets[i]; p < gv.d.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      if (gv.d.col_indices[p] != i) row += gv.d.values[p];
    gv.d.at(i, i) = -row;
  }
  return gv;
}

/// Provably stable explicit step size min_i m_i / (4 sum_{j != i} d_ij).
/// Returns +infinity when every viscosity vanishes (constant state or zero
/// flux); callers must then cap the step externally.
inline double tau_star(const GraphViscosity& gv, const FEOperators& ops) {
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < gv.d.rows; ++i) {
    double row = 0.0;
    for (int p = gv.d.row_offsets[i]; p < gv.d.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      if (gv.d.col_indices[p] != i) row += gv.d.values[p];
    if (row > 0.0) t = std::min(t, ops.lumped_mass[i] / (4.0 * row));
  }
  return t;
}

struct HighOrderViscosityPolicy {
  enum class Mode { zero, scaled };
  Mode mode = Mode::zero;
  std::vector<double> psi;  // per-DOF multipliers in [0,1] when mode == scaled

  static HighOrderViscosityPolicy none() { return {}; }
  static HighOrderViscosityPolicy scaled_by(std::vector<double> psi_values) {
    HighOrderViscosityPolicy p;
    p.mode = Mode::scaled;
    p.psi = std::move(psi_values);
    for (double v : p.psi)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("HighOrderViscosityPolicy: psi outside [0,1]");
    return p;
  }
};

/// High-order viscosity d^H_ij = d_ij max(psi_i, psi_j); the zero policy
/// returns an empty matrix standing for d^H = 0.
inline SparseMatrix high_order_viscosity(const GraphViscosity& gv,
                                         const HighOrderViscosityPolicy& policy) {
  if (policy.mode == HighOrderViscosityPolicy::Mode::zero) return SparseMatrix{};
  if (static_cast<int>(policy.psi.size()) != gv.d.rows)
    throw std::invalid_argument("high_order_viscosity: psi dimension mismatch");
  SparseMatrix dh = gv.d;
  for (int i = 0; i < dh.rows; ++i)
    for (int p = dh.row_offsets[i]; p < dh.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = dh.col_indices[p];
      if (j != i) dh.values[p] = gv.d.values[p] * std::max(policy.psi[i], policy.psi[j]);
    }
  for (int i = 0; i < dh.rows; ++i) {
    double row = 0.0;
    for (int p = dh.row_offsets[i]; p < dh.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      if (dh.col_indices[p] != i) row += dh.values[p];
    dh.at(i, i) = -row;
  }
  return dh;
}

namespace detail {
/// (F(U))_i = sum_j f(U_j) C_ij - d_ij (U_j - U_i); pass d = nullptr for the
/// pure Galerkin flux.
inline Vector flux_map(const StateVector& U, const FluxModel& flux, const SparseMatrix* d,
                       const FEOperators& ops) {
  const int I = ops.size();
  if (static_cast<int>(U.size()) != I) throw std::invalid_argument("flux_map: dimension mismatch");
  Vector fvals(static_cast<size_t>(I));
  for (int i = 0; i < I; ++i) fvals[i] = flux.value(U[i]);
  Vector out(static_cast<size_t>(I), 0.0);
  const SparseMatrix& C = ops.deriv;
  for (int i = 0; i < I; ++i) {
    double s = 0.0;
    for (int p = C.row_offsets[i]; p < C.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = C.col_indices[p];
      s += fvals[j] * C.values[p];
      if (d && j != i) s -= d->values[p] * (U[j] - U[i]);
    }
    out[i] = s;
  }
  return out;
}
}  // namespace detail

inline Vector flux_map_low(const StateVector& U, const FluxModel& flux, const GraphViscosity& gv,
                           const FEOperators& ops) {
  return detail::flux_map(U, flux, &gv.d, ops);
}

inline Vector flux_map_high(const StateVector& U, const FluxModel& flux, const GraphViscosity& gv,
                            const HighOrderViscosityPolicy& policy, const FEOperators& ops) {
  if (policy.mode == HighOrderViscosityPolicy::Mode::zero)
    return detail::flux_map(U, flux, nullptr, ops);
  const SparseMatrix dh = high_order_viscosity(gv, policy);
  return detail::flux_map(U, flux, &dh, ops);
}

namespace detail {
inline StateVector low_order_update(const StateVector& U, double tau_eff, const Vector& F_low,
                                    const FEOperators& ops) {
  StateVector W(U.size());
  for (size_t i = 0; i < U.size(); ++i) W[i] = U[i] - tau_eff / ops.lumped_mass[i] * F_low[i];
  return W;
}
}  // namespace detail

/// Graph-viscosity forward step W = U - (tau/m) F^L(U). Enforces the
/// maximum-principle step restriction tau_eff <= tau* computed from U unless
/// the caller opts out for diagnostics.
inline StateVector low_order_predict(const StateVector& U, double tau_eff, const FluxModel& flux,
                                     const FEOperators& ops, bool enforce_cfl = true) {
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
  if (enforce_cfl) {
    const double ts = tau_star(gv, ops);
    if (!(tau_eff <= ts * (1.0 + 1e-12)))
      throw std::invalid_argument("low_order_predict: tau exceeds the stable step tau*");
  }
  const Vector F = flux_map_low(U, flux, gv, ops);
  return detail::low_order_update(U, tau_eff, F, ops);
}

/// Consistent-mass high-order prediction: solves
///   M W = M U_anchor - tau sum_k delta_k F_k
/// where U_anchor is the last element of the stage history. The solve runs
/// Jacobi-preconditioned CG at relative residual `tol`, warm-started from the
/// anchor state.
inline StateVector high_order_predict(const std::vector<StateVector>& stage_history,
                                      const std::vector<Vector>& flux_history, double tau,
                                      const std::vector<double>& deltas, const FEOperators& ops,
                                      double tol = 1e-12, int max_iter = 400) {
  if (stage_history.empty() || flux_history.size() != deltas.size())
    throw std::invalid_argument("high_order_predict: inconsistent history");
  const StateVector& anchor = stage_history.back();
  Vector rhs = matvec(ops.mass, anchor);
  for (size_t k = 0; k < deltas.size(); ++k) {
    if (flux_history[k].size() != rhs.size())
      throw std::invalid_argument("high_order_predict: flux history dimension mismatch");
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] -= tau * deltas[k] * flux_history[k][i];
  }
  return cg_solve(ops.mass, rhs, tol, max_iter, &anchor);
}

}  // namespace gkdv
