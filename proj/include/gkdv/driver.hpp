// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/butcher.hpp"
#include "gkdv/dispersive.hpp"
#include "gkdv/fe_operators.hpp"
#include "gkdv/flux.hpp"
#include "gkdv/hyperbolic.hpp"
#include "gkdv/limiter.hpp"
#include "gkdv/mesh.hpp"

namespace gkdv {

/// Everything a stepper needs besides the tableau: physics, solver modes and
/// step-size policy knobs.
struct SchemeConfig {
  FluxModel flux;
  double epsilon = 1.0;
  double c_stab = 1.0;
  MassMode dispersive_mass = MassMode::consistent;  // honored by one-stage schemes
  bool limiter_on = true;
  bool unlimited_high_order = false;  // diagnostic: use W^H directly, no limiting
  // Multiplier on the curvature-proportional bounds relaxation
  // |u_max + u_min - 2u_i| used by the stepper's limiter. O(h^2) at smooth
  // points, so smooth extrema are not clipped; proportional to the local
  // oscillation elsewhere. Zero restores strict stencil bounds.
  double bound_relaxation = 0.25;
  HighOrderViscosityPolicy policy = HighOrderViscosityPolicy::none();
  std::optional<double> tau_max;
  std::optional<double> fixed_tau;  // bypasses the CFL-driven step choice
  bool max_efficient = false;       // equi-distributed stages, coefficients pre-scaled by s
  double cg_tol = 1e-12;
  int cg_max_iter = 400;
};

struct StepRecord {
  double t = 0.0;
  double mass = 0.0;
  double weighted_l2 = 0.0;
  double tau = 0.0;
};

struct RunState {
  double t = 0.0;
  StateVector U;
  long step_index = 0;
  std::vector<StepRecord> diagnostics;
};

struct Snapshot {
  double t = 0.0;
  StateVector U;
};

/// Caches factorizations that are reused across steps: the coupled
/// dispersive systems keyed by their scalar parameters, and the z-subsystem
/// for evaluating G.
class SolverWorkspace {
 public:
  SolverWorkspace(const Mesh& mesh, const FEOperators& ops) : mesh_(&mesh), ops_(&ops) {}

  const Mesh& mesh() const { return *mesh_; }
  const FEOperators& ops() const { return *ops_; }

  const DispersiveSystem& dispersive(double theta, double eps, double c, MassMode mode) {
    for (auto& e : entries_) {
      if (e.sys.theta == theta && e.sys.epsilon == eps && e.sys.c_stab == c &&
          e.sys.mass_mode == mode) {
        e.last_use = ++clock_;
        return e.sys;
      }
    }
    if (entries_.size() >= capacity_) {
      auto oldest = std::min_element(entries_.begin(), entries_.end(),
                                     [](const Entry& a, const Entry& b) { return a.last_use < b.last_use; });
      entries_.erase(oldest);
    }
    entries_.push_back({assemble_dispersive(*mesh_, *ops_, theta, eps, c, mode), ++clock_});
    return entries_.back().sys;
  }

  const ZSystem& z_system(double c) {
    if (!zsys_ || zsys_->c_stab != c) zsys_ = build_z_system(*ops_, c);
    return *zsys_;
  }

 private:
  struct Entry {
    DispersiveSystem sys;
    long last_use = 0;
  };
  const Mesh* mesh_;
  const FEOperators* ops_;
  std::vector<Entry> entries_;
  std::optional<ZSystem> zsys_;
  long clock_ = 0;
  size_t capacity_ = 6;
};

namespace detail {

struct StageHint {
  GraphViscosity gv;
  double tau_star_value = 0.0;
};

/// One IMEX step of size tau in incremental form. Returns the tau actually
/// used; the step is retried with a smaller tau when a later stage's state
/// tightens the CFL bound below the stage fraction.
inline double imex_step_with_tau(RunState& state, const ButcherPair& pair, double tau,
                                 const SchemeConfig& cfg, SolverWorkspace& ws,
                                 const StageHint* hint = nullptr) {
  const FEOperators& ops = ws.ops();
  const int I = ops.size();
  const int s = pair.s;
  if (static_cast<int>(state.U.size()) != I) throw std::invalid_argument("imex step: dimension mismatch");
  if (!(tau > 0.0)) throw std::invalid_argument("imex step: tau must be positive");
  const double coeff_scale = cfg.max_efficient ? static_cast<double>(s) : 1.0;
  const MassMode stage_mass = (s == 1) ? cfg.dispersive_mass : MassMode::consistent;

  for (int attempt = 0;; ++attempt) {
    const double tau_used = cfg.max_efficient ? tau / s : tau;
    std::vector<StateVector> states;
    states.reserve(static_cast<size_t>(s) + 1);
    states.push_back(state.U);
    std::vector<Vector> flux_high;        // F^H(U^{n,k}) for k = 1..current
    std::vector<SparseMatrix> visc_high;  // d^H at each stage (empty for the zero policy)
    std::vector<Vector> g_values(static_cast<size_t>(s) + 1);  // G(U^{n,k}); empty when unknown
    bool retry = false;

    for (int r = 1; r <= s && !retry; ++r) {
      const StateVector& anchor = states[static_cast<size_t>(r) - 1];
      GraphViscosity gv_local;
      const GraphViscosity* gv = nullptr;
      double ts = 0.0;
      if (r == 1 && hint && attempt == 0) {
        gv = &hint->gv;
        ts = hint->tau_star_value;
      } else {
        gv_local = compute_graph_viscosity(anchor, cfg.flux, ops);
        gv = &gv_local;
        ts = tau_star(*gv, ops);
      }
      const double sigma = (pair.c[r] - pair.c[r - 1]) * coeff_scale;
      const double tau_stage = tau_used * sigma;
      if (tau_stage > ts * (1.0 + 1e-12)) {
        if (attempt >= 10)
          throw std::runtime_error("imex step: stage CFL could not be satisfied after retries");
        tau *= 0.8;
        retry = true;
        break;
      }

      const Vector F_low = flux_map_low(anchor, cfg.flux, *gv, ops);
      const StateVector W_low = low_order_update(anchor, tau_stage, F_low, ops);

      StateVector W = W_low;
      if (cfg.limiter_on) {
        flux_high.push_back(flux_map_high(anchor, cfg.flux, *gv, cfg.policy, ops));
        visc_high.push_back(high_order_viscosity(*gv, cfg.policy));
        std::vector<double> deltas = pair.explicit_deltas(r);
        for (double& d : deltas) d *= coeff_scale;
        const StateVector W_high =
            high_order_predict(states, flux_high, tau_used, deltas, ops, cfg.cg_tol, cfg.cg_max_iter);
        if (cfg.unlimited_high_order) {
          W = W_high;
        } else {
          std::vector<StageFluxTerm> terms(static_cast<size_t>(r));
          for (int k = 0; k < r; ++k)
            terms[k] = {&states[k], deltas[k], visc_high[k].rows == I ? &visc_high[k] : nullptr};
          const AntidiffusiveFluxes af = compute_antidiffusive_fluxes_staged(
              anchor, W_low, W_high, tau_used, *gv, terms, cfg.flux, ops);
          if (cfg.bound_relaxation > 0.0) {
            // Curvature-proportional relaxation: covers the O(h^2) gap
            // between the discrete stencil extrema and the true local
            // extremum of a smooth profile, so traveling peaks are not
            // flattened; it is proportional to the local oscillation, so the
            // bounds stay sharp where the solution is rough.
            Vector relax(static_cast<size_t>(I));
            for (int i = 0; i < I; ++i) {
              double mn = anchor[i], mx = anchor[i];
              for (const int* j = ops.stencil_begin(i); j != ops.stencil_end(i); ++j) {
                mn = std::min(mn, anchor[*j]);
                mx = std::max(mx, anchor[*j]);
              }
              relax[i] = cfg.bound_relaxation * std::abs(mx + mn - 2.0 * anchor[i]);
            }
            W = limit(anchor, W_low, af, ops, &relax);
          } else {
            W = limit(anchor, W_low, af, ops);
          }
        }
      } else if (s > 1) {
        // Staged schemes feed F^H increments even without limiting is not
        // supported; the low-order chain alone is the unlimited variant.
        flux_high.emplace_back();
        visc_high.emplace_back();
      }

      // Dispersive update.
      std::vector<double> ideltas = pair.implicit_deltas(r);
      for (double& d : ideltas) d *= coeff_scale;
      const double gamma = pair.implicit_diagonal(r) * coeff_scale;
      Vector rhs;
      if (stage_mass == MassMode::consistent) {
        rhs = matvec(ops.mass, W);
      } else {
        rhs.resize(W.size());
        for (size_t i = 0; i < W.size(); ++i) rhs[i] = ops.lumped_mass[i] * W[i];
      }
      for (int k = 0; k < r; ++k) {
        if (ideltas[k] == 0.0) continue;
        if (g_values[static_cast<size_t>(k) + 1].empty()) {
          if (k == 0) {
            g_values[1] = apply_G(states[0], cfg.epsilon, ws.z_system(cfg.c_stab), ops);
          } else {
            throw std::logic_error("imex step: missing G value for an earlier implicit stage");
          }
        }
        const Vector& gk = g_values[static_cast<size_t>(k) + 1];
        for (int i = 0; i < I; ++i) rhs[i] -= tau_used * ideltas[k] * gk[i];
      }
      StateVector U_next;
      if (gamma != 0.0) {
        const DispersiveSystem& sys =
            ws.dispersive(tau_used * gamma, cfg.epsilon, cfg.c_stab, stage_mass);
        auto [u, z] = dispersive_solve_rhs(sys, rhs);
        U_next = std::move(u);
        if (r < s) {
          // Recover G(U^{n,l}) from the solved stage for later increments.
          Vector g(static_cast<size_t>(I));
          if (stage_mass == MassMode::consistent) {
            const Vector MU = matvec(ops.mass, U_next);
            for (int i = 0; i < I; ++i) g[i] = (rhs[i] - MU[i]) / (tau_used * gamma);
          } else {
            for (int i = 0; i < I; ++i)
              g[i] = (rhs[i] - ops.lumped_mass[i] * U_next[i]) / (tau_used * gamma);
          }
          g_values[static_cast<size_t>(r) + 1] = std::move(g);
        }
      } else {
        if (stage_mass == MassMode::consistent) {
          U_next = cg_solve(ops.mass, rhs, cfg.cg_tol, cfg.cg_max_iter, &W);
        } else {
          U_next.resize(W.size());
          for (size_t i = 0; i < W.size(); ++i) U_next[i] = rhs[i] / ops.lumped_mass[i];
        }
      }
      states.push_back(std::move(U_next));
    }
    if (retry) continue;

    state.U = std::move(states.back());
    state.t += tau;
    state.step_index += 1;
    return tau;
  }
}

inline double quantize_step_down(double tau_raw) {
  constexpr double base = 0.95;
  const double k = std::ceil(std::log(tau_raw) / std::log(base) - 1e-9);
  double q = std::exp(k * std::log(base));
  if (q > tau_raw) q *= base;
  return q;
}

}  // namespace detail

/// One Euler-IMEX step with tau = cfl * tau*: graph-viscosity prediction
/// (optionally limited against the consistent-mass update) followed by the
/// implicit dispersive update in the configured mass mode.
inline RunState euler_imex_step(RunState state, double cfl, const SchemeConfig& cfg,
                                SolverWorkspace& ws) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("euler_imex_step: cfl must be in (0,1]");
  static const ButcherPair euler = find_scheme("euler");
  detail::StageHint hint{compute_graph_viscosity(state.U, cfg.flux, ws.ops()), 0.0};
  hint.tau_star_value = tau_star(hint.gv, ws.ops());
  double tau = cfl * hint.tau_star_value;
  if (std::isinf(tau)) {
    if (!cfg.tau_max)
      throw std::invalid_argument("euler_imex_step: zero wave speeds and no tau_max configured");
    tau = *cfg.tau_max;
  } else if (cfg.tau_max) {
    tau = std::min(tau, *cfg.tau_max);
  }
  const double used = detail::imex_step_with_tau(state, euler, tau, cfg, ws, &hint);
  state.diagnostics.push_back(
      {state.t, discrete_mass(state.U, ws.ops()), weighted_l2_norm(state.U, ws.ops()), used});
  return state;
}

/// One s-stage IMEX step with tau = cfl * tau* / dc_max (or cfl * tau* * s in
/// maximally efficient mode, which is the same number on equi-distributed
/// abscissae).
inline RunState imex_step(RunState state, const ButcherPair& pair, double cfl,
                          const SchemeConfig& cfg, SolverWorkspace& ws) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("imex_step: cfl must be in (0,1]");
  if (cfg.max_efficient && !pair.equidistributed)
    throw std::invalid_argument("imex_step: maximally efficient mode needs equi-distributed stages");
  detail::StageHint hint{compute_graph_viscosity(state.U, cfg.flux, ws.ops()), 0.0};
  hint.tau_star_value = tau_star(hint.gv, ws.ops());
  double tau = cfg.max_efficient ? cfl * hint.tau_star_value * pair.s
                                 : cfl * hint.tau_star_value / pair.dc_max;
  if (std::isinf(tau)) {
    if (!cfg.tau_max) throw std::invalid_argument("imex_step: zero wave speeds and no tau_max configured");
    tau = *cfg.tau_max;
  } else if (cfg.tau_max) {
    tau = std::min(tau, *cfg.tau_max);
  }
  const double used = detail::imex_step_with_tau(state, pair, tau, cfg, ws, &hint);
  state.diagnostics.push_back(
      {state.t, discrete_mass(state.U, ws.ops()), weighted_l2_norm(state.U, ws.ops()), used});
  return state;
}

struct RunResult {
  RunState state;
  std::vector<Snapshot> snapshots;
  double max_mass_drift_rel = 0.0;
  bool monitors_ok = true;
};

/// Advances to time T, clipping steps to land exactly on T and on every
/// snapshot time. The step choice is memoryless (a function of the current
/// state alone): tau_raw = cfl tau*/dc_max rounded down onto a geometric grid
/// so that factorizations are reused across steps, then clipped to the next
/// target time. Restarting from any snapshot therefore reproduces the
/// original trajectory exactly.
inline RunResult run_to_time(RunState state, const ButcherPair& pair, double T, double cfl,
                             const SchemeConfig& cfg, SolverWorkspace& ws,
                             std::vector<double> snapshot_times = {}) {
  if (T < state.t - 1e-14 * std::max(1.0, std::abs(state.t)))
    throw std::invalid_argument("run_to_time: final time precedes current time");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("run_to_time: cfl must be in (0,1]");

  RunResult result;
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                       snapshot_times.end());
  std::vector<double> targets;
  for (double st : snapshot_times)
    if (st > state.t && st < T) targets.push_back(st);
  targets.push_back(T);

  const double mass0 = discrete_mass(state.U, ws.ops());
  double mass_scale = 0.0;
  for (size_t i = 0; i < state.U.size(); ++i)
    mass_scale += ws.ops().lumped_mass[i] * std::abs(state.U[i]);
  mass_scale = std::max({mass_scale, std::abs(mass0), 1e-300});

  auto snapshot_if_due = [&](double t) {
    for (double st : snapshot_times)
      if (t == st) result.snapshots.push_back({t, state.U});
  };

  size_t target_idx = 0;
  const double time_eps = 1e-14 * std::max(1.0, std::abs(T));
  while (target_idx < targets.size()) {
    const double target = targets[target_idx];
    if (target - state.t <= time_eps) {
      ++target_idx;
      continue;
    }
    detail::StageHint hint{compute_graph_viscosity(state.U, cfg.flux, ws.ops()), 0.0};
    hint.tau_star_value = tau_star(hint.gv, ws.ops());
    double tau_raw;
    if (cfg.fixed_tau) {
      tau_raw = *cfg.fixed_tau;
    } else {
      tau_raw = cfg.max_efficient ? cfl * hint.tau_star_value * pair.s
                                  : cfl * hint.tau_star_value / pair.dc_max;
      if (std::isinf(tau_raw)) {
        if (!cfg.tau_max)
          throw std::invalid_argument("run_to_time: zero wave speeds and no tau_max configured");
        tau_raw = *cfg.tau_max;
      } else {
        if (cfg.tau_max) tau_raw = std::min(tau_raw, *cfg.tau_max);
        tau_raw = detail::quantize_step_down(tau_raw);
      }
    }
    const double gap = target - state.t;
    const bool lands = tau_raw >= gap;
    const double tau = lands ? gap : tau_raw;
    const double used = detail::imex_step_with_tau(state, pair, tau, cfg, ws, &hint);
    if (lands && used == tau) state.t = target;  // land exactly, no drift
    for (double u : state.U)
      if (!std::isfinite(u))
        throw std::runtime_error("run_to_time: non-finite state at t = " + std::to_string(state.t) +
                                 " (step " + std::to_string(state.step_index) + ")");
    const double mass = discrete_mass(state.U, ws.ops());
    state.diagnostics.push_back({state.t, mass, weighted_l2_norm(state.U, ws.ops()), used});
    result.max_mass_drift_rel =
        std::max(result.max_mass_drift_rel, std::abs(mass - mass0) / mass_scale);
    snapshot_if_due(state.t);
    if (target - state.t <= time_eps) ++target_idx;
  }
  result.monitors_ok = result.max_mass_drift_rel <= 1e-12;
  result.state = std::move(state);
  return result;
}

}  // namespace gkdv
