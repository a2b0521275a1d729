// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkdv/butcher.hpp"
#include "gkdv/config.hpp"
#include "gkdv/driver.hpp"
#include "gkdv/fe_operators.hpp"
#include "gkdv/mesh.hpp"
#include "gkdv/scenarios.hpp"

namespace gkdv {

inline Mesh mesh_from_config(const RunConfig& cfg) {
  return build_mesh(cfg.a, cfg.b, cfg.num_cells, cfg.degree);
}

inline SchemeConfig scheme_config_from(const RunConfig& cfg, int dof_count) {
  SchemeConfig sc;
  sc.flux = make_builtin(cfg.flux_name, cfg.flux_param);
  sc.epsilon = cfg.epsilon;
  sc.c_stab = cfg.c_stab_value();
  sc.dispersive_mass = cfg.mass_mode;
  sc.limiter_on = cfg.limiter_on;
  if (cfg.psi_mode == "scaled")
    sc.policy = HighOrderViscosityPolicy::scaled_by(
        std::vector<double>(static_cast<size_t>(dof_count), cfg.psi_const));
  sc.tau_max = cfg.tau_max;
  sc.fixed_tau = cfg.fixed_tau;
  sc.max_efficient = cfg.max_efficient;
  return sc;
}

/// Initial data: the scenario's exact solution at t0 when available, else its
/// initial profile.
inline StateVector initial_state(const RunConfig& cfg, const Mesh& mesh) {
  const Scenario s = scenario(cfg.scenario_name);
  if (s.has_exact) {
    return interpolate([&](double x) { return s.exact(cfg.t0, x); }, mesh);
  }
  return interpolate(s.u0, mesh);
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

namespace detail {
inline void write_csv_value(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}
}  // namespace detail

/// Profile file: columns t,x,u with one row per DOF plus the periodically
/// identified endpoint.
inline void write_profile_csv(const std::string& path, double t, const Mesh& mesh,
                              const StateVector& U) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,x,u\n";
  auto row = [&](double x, double u) {
    detail::write_csv_value(os, t);
    os << ',';
    detail::write_csv_value(os, x);
    os << ',';
    detail::write_csv_value(os, u);
    os << '\n';
  };
  for (size_t i = 0; i < U.size(); ++i) row(mesh.dof_coords[i], U[i]);
  row(mesh.b, U[0]);
}

struct ProfileData {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
};

inline ProfileData read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "t,x,u")
    throw std::runtime_error("bad profile header in " + path);
  ProfileData p;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    double vals[3];
    for (double& v : vals) {
      if (!std::getline(ls, tok, ',')) throw std::runtime_error("bad profile row in " + path);
      v = std::stod(tok);
    }
    p.t = vals[0];
    p.x.push_back(vals[1]);
    p.u.push_back(vals[2]);
  }
  return p;
}

inline void write_diagnostics_csv(const std::string& path, const std::vector<StepRecord>& diag) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,mass,weighted_l2,tau\n";
  for (const auto& r : diag) {
    detail::write_csv_value(os, r.t);
    os << ',';
    detail::write_csv_value(os, r.mass);
    os << ',';
    detail::write_csv_value(os, r.weighted_l2);
    os << ',';
    detail::write_csv_value(os, r.tau);
    os << '\n';
  }
}

/// Number of strict local maxima above `threshold` in a periodic nodal
/// profile.
inline int count_local_maxima(const std::vector<double>& profile, double threshold) {
  const int n = static_cast<int>(profile.size());
  if (n < 3) return 0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double v = profile[i];
    if (v > threshold && v > profile[(i + n - 1) % n] && v > profile[(i + 1) % n]) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Configured runs
// ---------------------------------------------------------------------------

struct ConfiguredRun {
  RunConfig config;
  Mesh mesh;
  FEOperators ops;
  RunResult result;
};

/// Runs a configuration to its final time and returns the result together
/// with the discretization. `U0` overrides the initial state (restart).
inline ConfiguredRun run_configured(const RunConfig& cfg, const StateVector* U0 = nullptr,
                                    double t_start_override = 0.0, bool use_override = false) {
  ConfiguredRun run{cfg, mesh_from_config(cfg), {}, {}};
  run.ops = assemble_operators(run.mesh);
  SolverWorkspace ws(run.mesh, run.ops);
  const SchemeConfig sc = scheme_config_from(cfg, run.mesh.dof_count());
  const ButcherPair pair = find_scheme(cfg.scheme);
  RunState state;
  state.t = use_override ? t_start_override : cfg.t0;
  state.U = U0 ? *U0 : initial_state(cfg, run.mesh);
  run.result = run_to_time(std::move(state), pair, cfg.T, cfg.cfl, sc, ws, cfg.snapshots);
  return run;
}

/// Writes diagnostics, snapshot profiles and the final profile under
/// cfg.outdir. Returns the list of files written.
inline std::vector<std::string> emit_outputs(const ConfiguredRun& run) {
  namespace fs = std::filesystem;
  const fs::path dir(run.config.outdir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  std::vector<std::string> files;
  {
    const std::string p = (dir / "diagnostics.csv").string();
    write_diagnostics_csv(p, run.result.state.diagnostics);
    files.push_back(p);
  }
  int idx = 0;
  for (const auto& snap : run.result.snapshots) {
    char name[64];
    std::snprintf(name, sizeof(name), "profile_%03d.csv", idx++);
    const std::string p = (dir / name).string();
    write_profile_csv(p, snap.t, run.mesh, snap.U);
    files.push_back(p);
  }
  return files;
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int reported_dofs = 0;
  double err = 0.0;
  double rate = 0.0;  // log2(err_prev / err); 0 for the first row
};

struct ConvergenceReport {
  std::string scheme;
  std::string scenario;
  std::vector<ConvergenceRow> rows;
  bool complete = true;
  std::string failure;
};

/// Dyadic mesh refinement study against the scenario's exact solution.
inline ConvergenceReport convergence_study(const RunConfig& base, int num_refinements) {
  const Scenario s = scenario(base.scenario_name);
  if (!s.has_exact)
    throw std::invalid_argument("convergence_study: scenario has no exact solution");
  ConvergenceReport report;
  report.scheme = base.scheme;
  report.scenario = base.scenario_name;
  double prev_err = 0.0;
  for (int r = 0; r < num_refinements; ++r) {
    RunConfig cfg = base;
    cfg.num_cells = base.num_cells << r;
    try {
      const ConfiguredRun run = run_configured(cfg);
      const double err = relative_linf_error(run.result.state.U, s.exact, run.mesh, cfg.T);
      ConvergenceRow row;
      row.reported_dofs = run.mesh.reported_dofs();
      row.err = err;
      row.rate = report.rows.empty() ? 0.0 : std::log2(prev_err / err);
      report.rows.push_back(row);
      prev_err = err;
    } catch (const std::exception& e) {
      report.complete = false;
      report.failure = e.what();
      break;
    }
  }
  return report;
}

inline void write_convergence_csv(const std::string& path, const ConvergenceReport& rep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "reported_dofs,err_inf,rate\n";
  for (const auto& row : rep.rows) {
    os << row.reported_dofs << ',';
    detail::write_csv_value(os, row.err);
    os << ',';
    if (row.rate != 0.0) detail::write_csv_value(os, row.rate);
    else os << "--";
    os << '\n';
  }
  if (!rep.complete) os << "# incomplete: " << rep.failure << "\n";
}

inline std::string format_convergence_table(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << rep.scenario << " / " << rep.scheme << "\n";
  os << std::setw(10) << "#Dofs" << std::setw(14) << "err_inf" << std::setw(9) << "rate"
     << "\n";
  for (const auto& row : rep.rows) {
    os << std::setw(10) << row.reported_dofs << std::setw(14) << std::scientific
       << std::setprecision(2) << row.err << std::defaultfloat;
    if (row.rate != 0.0) os << std::setw(9) << std::fixed << std::setprecision(2) << row.rate;
    else os << std::setw(9) << "--";
    os << std::defaultfloat << "\n";
  }
  if (!rep.complete) os << "(incomplete: " << rep.failure << ")\n";
  return os.str();
}

}  // namespace gkdv
