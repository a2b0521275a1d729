// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gkdv/fe_operators.hpp"
#include "gkdv/hyperbolic.hpp"
#include "gkdv/mesh.hpp"
#include "gkdv/scenarios.hpp"
#include "support.hpp"

using namespace gkdv;
namespace ts = testing_support;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
StateVector soliton_state(const Mesh& mesh) {
  return interpolate(
      [](double x) {
        const double s = sech(x);
        return 2.0 * s * s;
      },
      mesh);
}
}  // namespace

TEST_CASE("graph viscosity on a constant state with linear flux", "[hyperbolic]") {
  const Mesh mesh = build_mesh(0.0, 2.0, 8, 1);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("linear", -3.0);
  const StateVector U(static_cast<size_t>(ops.size()), 0.7);
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
  for (int i = 0; i < ops.size(); ++i)
    for (int p = gv.d.row_offsets[i]; p < gv.d.row_offsets[i + 1]; ++p) {
      const int j = gv.d.col_indices[p];
      if (j == i) continue;
      REQUIRE_THAT(gv.d.values[p], WithinRel(3.0 * std::abs(ops.deriv.values[p]), 1e-14));
    }
}

TEST_CASE("graph viscosity edge value for the kdv6 flux", "[hyperbolic]") {
  const Mesh mesh = build_mesh(0.0, 2.0, 8, 1);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("kdv6");
  StateVector U(static_cast<size_t>(ops.size()), 0.0);
  U[3] = 2.0;
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
  // lambda_max(0, 2) = 12 and |C_ij| = 1/2 on a P1 stencil edge.
  REQUIRE_THAT(gv.d.coeff(2, 3), WithinRel(6.0, 1e-14));
  REQUIRE_THAT(gv.d.coeff(3, 4), WithinRel(6.0, 1e-14));
}

TEST_CASE("graph viscosity matches a dense edge-by-edge recomputation", "[hyperbolic]") {
  auto rng = ts::make_rng(11);
  const Mesh mesh = build_mesh(-4.0, 4.0, 12, 2);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("kdv6");
  const StateVector U = ts::random_state(rng, ops.size(), -1.0, 2.0);
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
  const auto dense_c = ops.deriv.to_dense();
  const int I = ops.size();
  for (int i = 0; i < I; ++i) {
    double row = 0.0;
    for (int j = 0; j < I; ++j) {
      if (i == j) continue;
      const bool on_stencil = dense_c[i][j] != 0.0 || ops.mass.coeff(i, j) != 0.0;
      if (!on_stencil) continue;
      const double expect = std::max(lambda_max(flux, U[i], U[j]) * std::abs(dense_c[i][j]),
                                     lambda_max(flux, U[j], U[i]) * std::abs(dense_c[j][i]));
      REQUIRE_THAT(gv.d.coeff(i, j), WithinRel(expect, 1e-13));
      REQUIRE(gv.d.coeff(i, j) == gv.d.coeff(j, i));
      row += gv.d.coeff(i, j);
    }
    REQUIRE_THAT(gv.d.coeff(i, i), WithinAbs(-row, 1e-13 * (1.0 + row)));
  }
}

TEST_CASE("tau_star closed form, sentinel, and dense oracle", "[hyperbolic]") {
  const Mesh mesh = build_mesh(0.0, 2.0, 8, 1);
  const FEOperators ops = assemble_operators(mesh);

  // Constant state, linear flux: every off-diagonal d_ij = |a|/2.
  const FluxModel lin = make_builtin("linear", 2.0);
  const StateVector U(static_cast<size_t>(ops.size()), 1.0);
  const GraphViscosity gv = compute_graph_viscosity(U, lin, ops);
  const double d_edge = 1.0;  // |a| * |C_ij| = 2 * 1/2
  const double h = mesh.cell_width();
  REQUIRE_THAT(tau_star(gv, ops), WithinRel(h / (8.0 * d_edge), 1e-13));

  // Zero flux on a constant state has no wave speeds at all.
  const FluxModel zero = make_builtin("linear", 0.0);
  const GraphViscosity gv0 = compute_graph_viscosity(U, zero, ops);
  REQUIRE(std::isinf(tau_star(gv0, ops)));

  // Single-soliton state: compare against the dense brute-force minimum.
  const Mesh mesh2 = build_mesh(-10.0, 10.0, 128, 1);
  const FEOperators ops2 = assemble_operators(mesh2);
  const StateVector sol = soliton_state(mesh2);
  const GraphViscosity gv2 = compute_graph_viscosity(sol, make_builtin("kdv6"), ops2);
  const auto dd = gv2.d.to_dense();
  double brute = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ops2.size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < ops2.size(); ++j)
      if (j != i) row += dd[i][j];
    if (row > 0.0) brute = std::min(brute, ops2.lumped_mass[i] / (4.0 * row));
  }
  REQUIRE_THAT(tau_star(gv2, ops2), WithinRel(brute, 1e-13));
}

TEST_CASE("low-order flux map: constant states, one-hot stencil, telescoping", "[hyperbolic]") {
  const Mesh mesh = build_mesh(0.0, 2.0, 8, 1);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel kdv6 = make_builtin("kdv6");

  const StateVector c(static_cast<size_t>(ops.size()), 1.3);
  const GraphViscosity gvc = compute_graph_viscosity(c, kdv6, ops);
  for (double v : flux_map_low(c, kdv6, gvc, ops)) REQUIRE_THAT(v, WithinAbs(0.0, 1e-13));

  // One-hot state with unit linear flux: hand-computed 3-point result.
  const FluxModel lin = make_builtin("linear", 1.0);
  StateVector onehot(static_cast<size_t>(ops.size()), 0.0);
  const int i0 = 4;
  onehot[i0] = 1.0;
  const GraphViscosity gvh = compute_graph_viscosity(onehot, lin, ops);
  const Vector F = flux_map_low(onehot, lin, gvh, ops);
  for (int i = 0; i < ops.size(); ++i) {
    const double expect = (i == i0) ? 1.0 : (i == i0 + 1 ? -1.0 : 0.0);
    REQUIRE_THAT(F[i], WithinAbs(expect, 1e-14));
  }

  auto rng = ts::make_rng(23);
  const StateVector r = ts::random_state(rng, ops.size());
  const GraphViscosity gvr = compute_graph_viscosity(r, kdv6, ops);
  const Vector Fr = flux_map_low(r, kdv6, gvr, ops);
  double sum = 0.0, scale = 0.0;
  for (double v : Fr) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  REQUIRE(std::abs(sum) <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("high-order flux map: policies and telescoping", "[hyperbolic]") {
  const Mesh mesh = build_mesh(-1.0, 1.0, 10, 2);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("burgers");
  auto rng = ts::make_rng(31);
  const StateVector U = ts::random_state(rng, ops.size());
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);

  const StateVector c(static_cast<size_t>(ops.size()), -0.4);
  const GraphViscosity gvc = compute_graph_viscosity(c, flux, ops);
  for (double v : flux_map_high(c, flux, gvc, HighOrderViscosityPolicy::none(), ops))
    REQUIRE_THAT(v, WithinAbs(0.0, 1e-13));

  const auto psi_one =
      HighOrderViscosityPolicy::scaled_by(std::vector<double>(static_cast<size_t>(ops.size()), 1.0));
  const Vector FH1 = flux_map_high(U, flux, gv, psi_one, ops);
  const Vector FL = flux_map_low(U, flux, gv, ops);
  for (int i = 0; i < ops.size(); ++i) REQUIRE(FH1[i] == FL[i]);

  const Vector FH = flux_map_high(U, flux, gv, HighOrderViscosityPolicy::none(), ops);
  double sum = 0.0, scale = 0.0;
  for (double v : FH) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  REQUIRE(std::abs(sum) <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("low_order_predict: fixed point, CFL guard, local bounds", "[hyperbolic]") {
  const Mesh mesh = build_mesh(-10.0, 10.0, 128, 1);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("kdv6");

  const StateVector c(static_cast<size_t>(ops.size()), 2.0);
  const GraphViscosity gvc = compute_graph_viscosity(c, flux, ops);
  const StateVector Wc = low_order_predict(c, tau_star(gvc, ops), flux, ops);
  for (int i = 0; i < ops.size(); ++i) REQUIRE_THAT(Wc[i], WithinAbs(2.0, 1e-13));

  const StateVector sol = soliton_state(mesh);
  const GraphViscosity gv = compute_graph_viscosity(sol, flux, ops);
  const double ts_val = tau_star(gv, ops);
  REQUIRE_THROWS_AS(low_order_predict(sol, 1.5 * ts_val, flux, ops), std::invalid_argument);
  REQUIRE_NOTHROW(low_order_predict(sol, 1.5 * ts_val, flux, ops, /*enforce_cfl=*/false));

  const StateVector W = low_order_predict(sol, ts_val, flux, ops);
  double umax = 0.0;
  for (double v : sol) umax = std::max(umax, std::abs(v));
  const double slack = 1e-12 * (1.0 + umax);
  for (int i = 0; i < ops.size(); ++i) {
    double lo = sol[i], hi = sol[i];
    for (const int* j = ops.stencil_begin(i); j != ops.stencil_end(i); ++j) {
      lo = std::min(lo, sol[*j]);
      hi = std::max(hi, sol[*j]);
    }
    REQUIRE(W[i] >= lo - slack);
    REQUIRE(W[i] <= hi + slack);
  }
}

TEST_CASE("low_order_predict properties on random states", "[hyperbolic]") {
  auto rng = ts::make_rng(57);
  const Mesh mesh = build_mesh(0.0, 2.0, 24, 1);
  const FEOperators ops = assemble_operators(mesh);
  const FluxModel flux = make_builtin("kdv6");
  for (int trial = 0; trial < 40; ++trial) {
    const StateVector U = ts::random_state(rng, ops.size(), 0.0, 1.0);
    const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
    const double ts_val = tau_star(gv, ops);
    const StateVector W = low_order_predict(U, ts_val, flux, ops);
    double lo = 1e300, hi = -1e300;
    for (double v : U) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double v : W) {
      REQUIRE(v >= lo - 1e-12);
      REQUIRE(v <= hi + 1e-12);
    }
    REQUIRE(weighted_l2_norm(W, ops) <= weighted_l2_norm(U, ops) * (1.0 + 1e-12));
    REQUIRE_THAT(discrete_mass(W, ops),
                 WithinAbs(discrete_mass(U, ops), 1e-12 * (1.0 + std::abs(discrete_mass(U, ops)))));
  }
}

TEST_CASE("discrete square-entropy inequality holds at tau*", "[hyperbolic]") {
  auto rng = ts::make_rng(73);
  const Mesh mesh = build_mesh(0.0, 2.0, 24, 1);
  const FEOperators ops = assemble_operators(mesh);
  for (const char* name : {"kdv6", "burgers"}) {
    const FluxModel flux = make_builtin(name);
    for (int trial = 0; trial < 50; ++trial) {
      const StateVector U = ts::random_state(rng, ops.size(), -1.0, 1.0);
      const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
      const double tau = tau_star(gv, ops);
      const StateVector W = low_order_predict(U, tau, flux, ops);
      auto eta = [](double u) { return 0.5 * u * u; };
      for (int i = 0; i < ops.size(); ++i) {
        double q_term = 0.0, d_term = 0.0, scale = 1.0;
        for (int p = ops.deriv.row_offsets[i]; p < ops.deriv.row_offsets[i + 1]; ++p) {
          const int j = ops.deriv.col_indices[p];
          q_term += ops.deriv.values[p] * flux.square_entropy_flux(U[j]);
          if (j != i) d_term += gv.d.values[p] * (eta(U[j]) - eta(U[i]));
          scale += std::abs(q_term) + std::abs(d_term);
        }
        const double row =
            ops.lumped_mass[i] / tau * (eta(W[i]) - eta(U[i])) + q_term - d_term;
        REQUIRE(row <= 1e-10 * scale);
      }
    }
  }
}

TEST_CASE("high_order_predict: trivial increments and dense oracle", "[hyperbolic]") {
  const Mesh mesh = build_mesh(-2.0, 2.0, 12, 2);
  const FEOperators ops = assemble_operators(mesh);
  auto rng = ts::make_rng(91);
  const StateVector U = ts::random_smooth_state(rng, mesh);

  // Zero flux history returns the anchor state.
  const Vector zeroF(static_cast<size_t>(ops.size()), 0.0);
  const StateVector W0 = high_order_predict({U}, {zeroF}, 0.01, {1.0}, ops);
  for (int i = 0; i < ops.size(); ++i) REQUIRE_THAT(W0[i], WithinAbs(U[i], 1e-12));

  // Galerkin flux with the mass matrix replaced by the lumped diagonal is the
  // d = 0 low-order update: F^H under the zero policy equals F^L with a
  // zeroed graph viscosity.
  const FluxModel flux = make_builtin("burgers");
  const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
  const Vector FH = flux_map_high(U, flux, gv, HighOrderViscosityPolicy::none(), ops);
  GraphViscosity zero_visc;
  zero_visc.d = gv.d.pattern_copy();
  const Vector FL0 = flux_map_low(U, flux, zero_visc, ops);
  const double tau = 1e-3;
  for (int i = 0; i < ops.size(); ++i) {
    REQUIRE(FH[i] == FL0[i]);
    const double lumped_pred = U[i] - tau / ops.lumped_mass[i] * FL0[i];
    REQUIRE_THAT(lumped_pred, WithinAbs(U[i] - tau / ops.lumped_mass[i] * FH[i], 1e-15));
  }

  // Consistent-mass solve against the dense oracle.
  const StateVector WH = high_order_predict({U}, {FH}, tau, {1.0}, ops, 1e-13);
  Vector rhs = matvec(ops.mass, U);
  for (int i = 0; i < ops.size(); ++i) rhs[i] -= tau * FH[i];
  const Vector dense = ts::dense_solve(ops.mass.to_dense(), rhs);
  for (int i = 0; i < ops.size(); ++i) REQUIRE_THAT(WH[i], WithinAbs(dense[i], 1e-10));

  // Conservation through the consistent mass solve.
  REQUIRE_THAT(discrete_mass(WH, ops),
               WithinAbs(discrete_mass(U, ops), 1e-11 * (1.0 + std::abs(discrete_mass(U, ops)))));
}
