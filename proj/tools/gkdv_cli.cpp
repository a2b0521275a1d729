// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: configured runs, convergence studies, scenario
// listing and a quick invariant check.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkdv/butcher.hpp"
#include "gkdv/config.hpp"
#include "gkdv/driver.hpp"
#include "gkdv/harness.hpp"
#include "gkdv/limiter.hpp"

namespace {

gkdv::RunConfig load_config(const std::string& config_path,
                            const std::vector<std::string>& sets,
                            const std::string& scenario_name) {
  gkdv::RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config file " + config_path);
    std::stringstream buf;
    buf << is.rdbuf();
    cfg = gkdv::parse_config_text(buf.str());
  } else {
    cfg = gkdv::config_from_scenario(scenario_name);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
    gkdv::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int cmd_run(gkdv::RunConfig cfg, const std::string& resume_path) {
  if (cfg.snapshots.empty()) cfg.snapshots = {cfg.T};  // always leave a final profile
  gkdv::ConfiguredRun run;
  if (!resume_path.empty()) {
    const gkdv::ProfileData prof = gkdv::read_profile_csv(resume_path);
    const gkdv::Mesh mesh = gkdv::mesh_from_config(cfg);
    if (static_cast<int>(prof.u.size()) < mesh.dof_count())
      throw std::runtime_error("resume profile has too few rows for this mesh");
    gkdv::StateVector U(prof.u.begin(), prof.u.begin() + mesh.dof_count());
    run = gkdv::run_configured(cfg, &U, prof.t, true);
  } else {
    run = gkdv::run_configured(cfg);
  }
  for (const auto& f : gkdv::emit_outputs(run)) std::cout << "wrote " << f << "\n";
  std::printf("final t = %.12g after %ld steps; max relative mass drift %.3e\n",
              run.result.state.t, run.result.state.step_index, run.result.max_mass_drift_rel);
  if (!run.result.monitors_ok) {
    std::cerr << "FAIL: in-run invariant monitors (mass conservation) violated\n";
    return 1;
  }
  return 0;
}

int cmd_converge(const gkdv::RunConfig& cfg, int refinements) {
  const gkdv::ConvergenceReport rep = gkdv::convergence_study(cfg, refinements);
  std::cout << gkdv::format_convergence_table(rep);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.outdir);
  const std::string csv = (fs::path(cfg.outdir) / "convergence.csv").string();
  const std::string txt = (fs::path(cfg.outdir) / "convergence.txt").string();
  gkdv::write_convergence_csv(csv, rep);
  std::ofstream(txt) << gkdv::format_convergence_table(rep);
  std::cout << "wrote " << csv << "\nwrote " << txt << "\n";
  return rep.complete ? 0 : 1;
}

int cmd_scenarios() {
  for (const auto& name : gkdv::scenario_names()) {
    const gkdv::Scenario s = gkdv::scenario(name);
    std::printf("%-15s D=(%g,%g)  T=%g  flux=%s  eps=%g  %s/P%d cells=%d  exact=%s\n",
                name.c_str(), s.a, s.b, s.T, s.flux_name.c_str(), s.epsilon, s.scheme.c_str(),
                s.degree, s.num_cells, s.has_exact ? "yes" : "no");
  }
  return 0;
}

struct CheckScope {
  int failures = 0;
  void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : " - ",
                detail.c_str());
    if (!ok) ++failures;
  }
};

int cmd_check() {
  using namespace gkdv;
  CheckScope out;
  std::mt19937_64 rng(20240615u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int degree : {1, 2, 3}) {
    const Mesh mesh = build_mesh(-3.0, 5.0, 24, degree);
    const FEOperators ops = assemble_operators(mesh);
    double worst_c = 0.0, worst_m = 0.0, mass_sum = 0.0, worst_skew = 0.0;
    for (int i = 0; i < ops.size(); ++i) {
      double rc = 0.0, rm = 0.0;
      for (int p = ops.deriv.row_offsets[i]; p < ops.deriv.row_offsets[i + 1]; ++p) {
        rc += ops.deriv.values[p];
        rm += ops.mass.values[p];
        const int j = ops.deriv.col_indices[p];
        worst_skew = std::max(worst_skew,
                              std::abs(ops.deriv.values[p] + ops.deriv.coeff(j, i)));
      }
      worst_c = std::max(worst_c, std::abs(rc));
      worst_m = std::max(worst_m, std::abs(rm - ops.lumped_mass[i]));
      mass_sum += ops.lumped_mass[i];
    }
    out.report("operators P" + std::to_string(degree),
               worst_c < 1e-13 && worst_m < 1e-13 && worst_skew < 1e-13 &&
                   std::abs(mass_sum - mesh.length()) < 1e-12,
               "row sums, skew symmetry, total mass");
  }

  {
    const Mesh mesh = build_mesh(-10.0, 10.0, 128, 1);
    const FEOperators ops = assemble_operators(mesh);
    const FluxModel flux = make_builtin("kdv6");
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      StateVector U(mesh.dof_count());
      for (auto& v : U) v = 2.0 * unit(rng) - 0.5;
      const GraphViscosity gv = compute_graph_viscosity(U, flux, ops);
      const double ts = tau_star(gv, ops);
      const StateVector W = low_order_predict(U, ts, flux, ops);
      for (int i = 0; i < ops.size(); ++i) {
        double lo = U[i], hi = U[i];
        for (const int* j = ops.stencil_begin(i); j != ops.stencil_end(i); ++j) {
          lo = std::min(lo, U[*j]);
          hi = std::max(hi, U[*j]);
        }
        if (W[i] < lo - 1e-11 || W[i] > hi + 1e-11) ok = false;
      }
      const Vector FH = flux_map_high(U, flux, gv, HighOrderViscosityPolicy::none(), ops);
      const StateVector WH = high_order_predict({U}, {FH}, ts, {1.0}, ops);
      const AntidiffusiveFluxes af =
          compute_antidiffusive_fluxes(U, W, WH, ts, gv, nullptr, flux, ops);
      const StateVector WL = limit(U, W, af, ops);
      const double dm = std::abs(discrete_mass(WL, ops) - discrete_mass(U, ops));
      if (dm > 1e-11 * (1.0 + std::abs(discrete_mass(U, ops)))) ok = false;
    }
    out.report("maximum principle + limiter contract", ok);
  }

  {
    const Mesh mesh = build_mesh(0.0, 2.0, 32, 2);
    const FEOperators ops = assemble_operators(mesh);
    bool ok = true;
    for (double tau : {1e-4, 1e-2, 1.0}) {
      const DispersiveSystem sys = assemble_dispersive(mesh, ops, tau, 1.0, 0.5, MassMode::consistent);
      for (int trial = 0; trial < 10; ++trial) {
        StateVector W(mesh.dof_count());
        for (auto& v : W) v = unit(rng) - 0.5;
        auto [U, Z] = dispersive_update(sys, W, ops);
        StateVector D(U.size());
        for (size_t i = 0; i < U.size(); ++i) D[i] = U[i] - W[i];
        const double lhs = l2_inner(U, U, ops) + l2_inner(D, D, ops) +
                           2.0 * tau * 1.0 * 0.5 * z_defect_norm_sq(U, Z, ops);
        const double rhs = l2_inner(W, W, ops);
        if (std::abs(lhs - rhs) > 1e-10 * rhs) ok = false;
      }
    }
    out.report("dispersive energy identity", ok);
  }

  {
    RunConfig cfg = config_from_scenario("single_soliton");
    cfg.num_cells = 128;
    cfg.T = 0.05;
    const ConfiguredRun run = run_configured(cfg);
    out.report("short soliton run mass conservation", run.result.monitors_ok,
               "drift " + std::to_string(run.result.max_mass_drift_rel));
  }

  std::printf("%s\n", out.failures == 0 ? "all checks passed" : "CHECK FAILURES PRESENT");
  return out.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic 1D generalized KdV solver (IMEX finite elements)"};
  app.require_subcommand(1);

  std::string config_path, scenario_name = "single_soliton", resume_path;
  std::vector<std::string> sets;
  int refinements = 4;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--scenario", scenario_name, "scenario defaults when no config file is given");
    cmd->add_option("--set", sets, "override a config key, e.g. --set num_cells=512");
  };

  CLI::App* run = app.add_subcommand("run", "run one configuration and emit CSV outputs");
  add_common(run);
  run->add_option("--resume-from", resume_path, "profile CSV to restart from");

  CLI::App* conv = app.add_subcommand("converge", "dyadic-refinement convergence study");
  add_common(conv);
  conv->add_option("--refinements", refinements, "number of dyadic refinements");

  app.add_subcommand("scenarios", "list built-in scenarios");
  app.add_subcommand("check", "run the quick invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(load_config(config_path, sets, scenario_name), resume_path);
    if (conv->parsed()) return cmd_converge(load_config(config_path, sets, scenario_name), refinements);
    if (app.get_subcommand("scenarios")->parsed()) return cmd_scenarios();
    if (app.get_subcommand("check")->parsed()) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
