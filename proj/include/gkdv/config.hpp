// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkdv/dispersive.hpp"
#include "gkdv/scenarios.hpp"

namespace gkdv {

/// Declarative run configuration. Values start from the scenario defaults and
/// are overridden by config-file entries and command-line settings.
struct RunConfig {
  std::string scenario_name = "single_soliton";
  double a = -10.0, b = 10.0;
  int num_cells = 1024;
  int degree = 1;
  std::string flux_name = "kdv6";
  double flux_param = 0.0;
  double epsilon = 1.0;
  std::optional<double> c_stab;  // defaults to 1/(b-a) when unset
  std::string scheme = "imex33";
  double cfl = 0.25;
  double t0 = 0.0;
  double T = 1.0;
  std::vector<double> snapshots;
  MassMode mass_mode = MassMode::consistent;
  std::string outdir = "out";
  bool limiter_on = true;
  std::string psi_mode = "zero";  // zero | scaled
  double psi_const = 1.0;
  std::optional<double> tau_max;
  std::optional<double> fixed_tau;
  bool max_efficient = false;

  double c_stab_value() const { return c_stab ? *c_stab : 1.0 / (b - a); }

  bool operator==(const RunConfig&) const = default;
};

inline RunConfig config_from_scenario(const std::string& name) {
  const Scenario s = scenario(name);
  RunConfig c;
  c.scenario_name = name;
  c.a = s.a;
  c.b = s.b;
  c.num_cells = s.num_cells;
  c.degree = s.degree;
  c.flux_name = s.flux_name;
  c.flux_param = s.flux_param;
  c.epsilon = s.epsilon;
  c.scheme = s.scheme;
  c.cfl = s.cfl;
  c.t0 = s.t0;
  c.T = s.T;
  c.mass_mode = s.mass_mode;
  c.limiter_on = s.limiter_on;
  return c;
}

namespace detail {
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
inline bool parse_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("config: expected on/off, got \"" + v + "\"");
}
}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  auto num = [&]() { return std::stod(value); };
  if (key == "scenario") c.scenario_name = value;
  else if (key == "domain_a") c.a = num();
  else if (key == "domain_b") c.b = num();
  else if (key == "num_cells") c.num_cells = static_cast<int>(num());
  else if (key == "degree") c.degree = static_cast<int>(num());
  else if (key == "flux") c.flux_name = value;
  else if (key == "flux_param") c.flux_param = num();
  else if (key == "epsilon") c.epsilon = num();
  else if (key == "c_stab") c.c_stab = num();
  else if (key == "scheme") c.scheme = value;
  else if (key == "cfl") c.cfl = num();
  else if (key == "t0") c.t0 = num();
  else if (key == "T") c.T = num();
  else if (key == "snapshots") {
    c.snapshots.clear();
    std::istringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) c.snapshots.push_back(std::stod(tok));
    }
  } else if (key == "mass_mode") {
    if (value == "lumped") c.mass_mode = MassMode::lumped;
    else if (value == "consistent") c.mass_mode = MassMode::consistent;
    else throw std::invalid_argument("config: mass_mode must be lumped or consistent");
  } else if (key == "outdir") c.outdir = value;
  else if (key == "limiter") c.limiter_on = detail::parse_bool(value);
  else if (key == "psi_mode") {
    if (value != "zero" && value != "scaled")
      throw std::invalid_argument("config: psi_mode must be zero or scaled");
    c.psi_mode = value;
  } else if (key == "psi_const") c.psi_const = num();
  else if (key == "tau_max") c.tau_max = num();
  else if (key == "fixed_tau") c.fixed_tau = num();
  else if (key == "max_efficient") c.max_efficient = detail::parse_bool(value);
  else throw std::invalid_argument("config: unknown key \"" + key + "\"");
}

/// Parses `key = value` lines; '#' starts a comment. A `scenario` line resets
/// the defaults before later keys override them.
inline RunConfig parse_config_text(const std::string& text) {
  // First pass: find the scenario to seed defaults.
  std::string scenario_name = "single_soliton";
  std::vector<std::pair<std::string, std::string>> settings;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream probe(line);
      std::string leftover;
      if (probe >> leftover) throw std::invalid_argument("config: malformed line \"" + line + "\"");
      continue;
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "scenario") scenario_name = value;
    settings.emplace_back(key, value);
  }
  RunConfig c = config_from_scenario(scenario_name);
  for (const auto& [key, value] : settings) apply_setting(c, key, value);
  return c;
}

inline std::string emit_config(const RunConfig& c) {
  std::ostringstream out;
  out << "scenario = " << c.scenario_name << "\n";
  out << "domain_a = " << detail::fmt_double(c.a) << "\n";
  out << "domain_b = " << detail::fmt_double(c.b) << "\n";
  out << "num_cells = " << c.num_cells << "\n";
  out << "degree = " << c.degree << "\n";
  out << "flux = " << c.flux_name << "\n";
  out << "flux_param = " << detail::fmt_double(c.flux_param) << "\n";
  out << "epsilon = " << detail::fmt_double(c.epsilon) << "\n";
  if (c.c_stab) out << "c_stab = " << detail::fmt_double(*c.c_stab) << "\n";
  out << "scheme = " << c.scheme << "\n";
  out << "cfl = " << detail::fmt_double(c.cfl) << "\n";
  out << "t0 = " << detail::fmt_double(c.t0) << "\n";
  out << "T = " << detail::fmt_double(c.T) << "\n";
  if (!c.snapshots.empty()) {
    out << "snapshots = ";
    for (size_t i = 0; i < c.snapshots.size(); ++i)
      out << (i ? "," : "") << detail::fmt_double(c.snapshots[i]);
    out << "\n";
  }
  out << "mass_mode = " << (c.mass_mode == MassMode::lumped ? "lumped" : "consistent") << "\n";
  out << "outdir = " << c.outdir << "\n";
  out << "limiter = " << (c.limiter_on ? "on" : "off") << "\n";
  out << "psi_mode = " << c.psi_mode << "\n";
  out << "psi_const = " << detail::fmt_double(c.psi_const) << "\n";
  if (c.tau_max) out << "tau_max = " << detail::fmt_double(*c.tau_max) << "\n";
  if (c.fixed_tau) out << "fixed_tau = " << detail::fmt_double(*c.fixed_tau) << "\n";
  out << "max_efficient = " << (c.max_efficient ? "on" : "off") << "\n";
  return out.str();
}

}  // namespace gkdv
