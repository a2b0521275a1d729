// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gkdv/fe_operators.hpp"
#include "gkdv/flux.hpp"
#include "gkdv/hyperbolic.hpp"
#include "gkdv/sparse.hpp"

namespace gkdv {

/// Skew-symmetric antidiffusive fluxes on the mesh stencil, normalized so
/// that W^H_i = W^L_i + (1/m_i) sum_j A_ij.
struct AntidiffusiveFluxes {
  SparseMatrix A;
};

/// One explicit-history contribution to a stage's antidiffusive fluxes:
/// the stage state U^{n,k}, its increment weight a^e_{l,k} - a^e_{l-1,k}, and
/// the high-order viscosity used in F^H(U^{n,k}) (empty matrix for d^H = 0).
struct StageFluxTerm {
  const StateVector* state = nullptr;
  double delta = 0.0;
  const SparseMatrix* d_high = nullptr;  // nullptr or empty means d^H = 0
};

/// Builds the antidiffusive fluxes between a lumped low-order update W_L
/// (one increment of size tau * sum_k delta_k from U) and a consistent-mass
/// high-order update W_H assembled from the stage history. Verifies the
/// reconstruction identity and throws if it fails.
inline AntidiffusiveFluxes compute_antidiffusive_fluxes_staged(
    const StateVector& U, const StateVector& W_L, const StateVector& W_H, double tau,
    const GraphViscosity& d_L, const std::vector<StageFluxTerm>& history, const FluxModel& flux,
    const FEOperators& ops, bool mass_correction = true) {
  const int I = ops.size();
  if (static_cast<int>(U.size()) != I || W_L.size() != U.size() || W_H.size() != U.size())
    throw std::invalid_argument("compute_antidiffusive_fluxes: dimension mismatch");

  Vector f_anchor(static_cast<size_t>(I));
  for (int i = 0; i < I; ++i) f_anchor[i] = flux.value(U[i]);
  std::vector<Vector> f_hist(history.size(), Vector(static_cast<size_t>(I)));
  for (size_t k = 0; k < history.size(); ++k) {
    const StateVector& Uk = *history[k].state;
    if (Uk.size() != U.size())
      throw std::invalid_argument("compute_antidiffusive_fluxes: history dimension mismatch");
    for (int i = 0; i < I; ++i) f_hist[k][i] = flux.value(Uk[i]);
  }

  AntidiffusiveFluxes af;
  af.A = ops.mass.pattern_copy();
  const SparseMatrix& M = ops.mass;
  const SparseMatrix& C = ops.deriv;
  for (int i = 0; i < I; ++i) {
    for (int p = M.row_offsets[i]; p < M.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = M.col_indices[p];
      if (j <= i) continue;
      double a = mass_correction ? M.values[p] * ((W_H[i] - U[i]) - (W_H[j] - U[j])) : 0.0;
      const double cij = C.values[p];
      const double dl = d_L.d.values[p];
      for (size_t k = 0; k < history.size(); ++k) {
        const StateVector& Uk = *history[k].state;
        double term = cij * (f_anchor[i] + f_anchor[j] - f_hist[k][i] - f_hist[k][j]) -
                      dl * (U[j] - U[i]);
        if (history[k].d_high && history[k].d_high->rows == I)
          term += history[k].d_high->values[p] * (Uk[j] - Uk[i]);
        a += tau * history[k].delta * term;
      }
      af.A.values[p] = a;
      af.A.at(j, i) = -a;
    }
  }

  // Reconstruction identity: the fluxes must reassemble the gap between the
  // two updates exactly, else the decomposition is inconsistent.
  double err = 0.0, scale = 1.0;
  for (int i = 0; i < I; ++i) {
    double s = 0.0;
    for (int p = af.A.row_offsets[i]; p < af.A.row_offsets[static_cast<size_t>(i) + 1]; ++p)
      s += af.A.values[p];
    err = std::max(err, std::abs(W_H[i] - W_L[i] - s / ops.lumped_mass[i]));
    scale = std::max(scale, std::abs(W_H[i]));
  }
  if (err > 1e-9 * scale)
    throw std::runtime_error("compute_antidiffusive_fluxes: reconstruction identity residual " +
                             std::to_string(err / scale));
  return af;
}

/// Single-increment form: low and high order updates built from the same
/// state U with step tau_eff and viscosities d_L, d_H. `mass_correction`
/// false is the diagnostic mode in which W_H was computed with the lumped
/// mass matrix.
inline AntidiffusiveFluxes compute_antidiffusive_fluxes(const StateVector& U, const StateVector& W_L,
                                                        const StateVector& W_H, double tau_eff,
                                                        const GraphViscosity& d_L,
                                                        const SparseMatrix* d_H, const FluxModel& flux,
                                                        const FEOperators& ops,
                                                        bool mass_correction = true) {
  StageFluxTerm term{&U, 1.0, d_H};
  return compute_antidiffusive_fluxes_staged(U, W_L, W_H, tau_eff, d_L, {term}, flux, ops,
                                             mass_correction);
}

/// Zalesak flux-corrected blend of W_L and W_L + M_L^{-1} A. The result
/// stays within the stencil-local bounds of U and conserves the lumped-mass
/// integral of W_L. `bound_relax`, when given, widens the bounds per DOF;
/// callers use a refinement-vanishing relaxation so smooth extrema are not
/// clipped at the scheme's accuracy level.
inline StateVector limit(const StateVector& U, const StateVector& W_L, const AntidiffusiveFluxes& af,
                         const FEOperators& ops, const Vector* bound_relax = nullptr) {
  const int I = ops.size();
  if (static_cast<int>(U.size()) != I || W_L.size() != U.size())
    throw std::invalid_argument("limit: dimension mismatch");
  if (bound_relax && static_cast<int>(bound_relax->size()) != I)
    throw std::invalid_argument("limit: bound relaxation dimension mismatch");
  const SparseMatrix& A = af.A;

  double umax = 0.0;
  for (double v : U) umax = std::max(umax, std::abs(v));
  const double slack = 1e-12 * (1.0 + umax);

  Vector lo(static_cast<size_t>(I)), hi(static_cast<size_t>(I));
  for (int i = 0; i < I; ++i) {
    double mn = U[i], mx = U[i];
    for (const int* j = ops.stencil_begin(i); j != ops.stencil_end(i); ++j) {
      mn = std::min(mn, U[*j]);
      mx = std::max(mx, U[*j]);
    }
    if (bound_relax) {
      mn -= (*bound_relax)[i];
      mx += (*bound_relax)[i];
    }
    lo[i] = mn;
    hi[i] = mx;
    if (W_L[i] < mn - slack || W_L[i] > mx + slack)
      throw std::invalid_argument("limit: low-order state violates local bounds (CFL breach upstream)");
  }

  Vector r_plus(static_cast<size_t>(I), 1.0), r_minus(static_cast<size_t>(I), 1.0);
  for (int i = 0; i < I; ++i) {
    double p_plus = 0.0, p_minus = 0.0;
    for (int p = A.row_offsets[i]; p < A.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const double a = A.values[p];
      if (a > 0.0) p_plus += a;
      else p_minus += a;
    }
    const double q_plus = std::max(0.0, ops.lumped_mass[i] * (hi[i] - W_L[i]));
    const double q_minus = std::min(0.0, ops.lumped_mass[i] * (lo[i] - W_L[i]));
    r_plus[i] = p_plus > 0.0 ? std::min(1.0, q_plus / p_plus) : 1.0;
    r_minus[i] = p_minus < 0.0 ? std::min(1.0, q_minus / p_minus) : 1.0;
  }

  StateVector W = W_L;
  for (int i = 0; i < I; ++i) {
    double s = 0.0;
    for (int p = A.row_offsets[i]; p < A.row_offsets[static_cast<size_t>(i) + 1]; ++p) {
      const int j = A.col_indices[p];
      const double a = A.values[p];
      const double c = a > 0.0 ? std::min(r_plus[i], r_minus[j])
                               : (a < 0.0 ? std::min(r_minus[i], r_plus[j]) : 1.0);
      s += c * a;
    }
    W[i] += s / ops.lumped_mass[i];
  }
  return W;
}

}  // namespace gkdv
