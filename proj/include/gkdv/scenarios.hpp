// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkdv/dispersive.hpp"

namespace gkdv {

inline double sech(double x) {
  const double e = std::exp(-std::abs(x));
  return 2.0 * e / (1.0 + e * e);
}

/// A named benchmark problem: initial data, exact solution when one exists,
/// and the run defaults it is normally solved with.
struct Scenario {
  std::string name;
  std::function<double(double)> u0;
  std::function<double(double, double)> exact;  // (t, x); null when unknown
  bool has_exact = false;

  double a = 0.0, b = 1.0;
  double t0 = 0.0, T = 1.0;
  std::string flux_name = "kdv6";
  double flux_param = 0.0;
  double epsilon = 1.0;
  std::string scheme = "imex33";
  double cfl = 0.25;
  int degree = 1;
  int num_cells = 1024;
  bool limiter_on = true;
  MassMode mass_mode = MassMode::consistent;
};

inline std::vector<std::string> scenario_names() {
  return {"single_soliton", "two_soliton", "three_soliton", "zabusky"};
}

inline Scenario scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "single_soliton") {
    s.exact = [](double t, double x) {
      const double v = sech(x - 4.0 * t);
      return 2.0 * v * v;
    };
    s.has_exact = true;
    s.u0 = [e = s.exact](double x) { return e(0.0, x); };
    s.a = -10.0;
    s.b = 10.0;
    s.T = 2.0;
  } else if (name == "two_soliton") {
    s.exact = [](double t, double x) {
      const double num = 3.0 + 4.0 * std::cosh(2.0 * x - 8.0 * t) + std::cosh(4.0 * x - 64.0 * t);
      const double den = 3.0 * std::cosh(x - 28.0 * t) + std::cosh(3.0 * x - 36.0 * t);
      return 12.0 * num / (den * den);
    };
    s.has_exact = true;
    s.u0 = [e = s.exact](double x) { return e(0.0, x); };
    s.a = -10.0;
    s.b = 20.0;
    s.T = 0.5;
    s.scheme = "imex22";
    s.cfl = 0.05;
  } else if (name == "three_soliton") {
    s.u0 = [](double x) {
      const double s1 = sech(std::sqrt(2.0) * x);
      const double s2 = sech(x - 7.0);
      const double s3 = sech((x - 15.0) / std::sqrt(2.0));
      return 4.0 * s1 * s1 + 2.0 * s2 * s2 + s3 * s3;
    };
    s.a = -5.0;
    s.b = 45.0;
    s.T = 5.0;
    s.num_cells = 2048;
  } else if (name == "zabusky") {
    s.u0 = [](double x) { return std::cos(M_PI * x); };
    s.a = 0.0;
    s.b = 2.0;
    s.T = 3.6 / M_PI;
    s.flux_name = "burgers";
    const double delta = 0.022;
    s.epsilon = delta * delta;
    s.degree = 2;
    s.num_cells = 512;
  } else {
    throw std::invalid_argument("scenario: unknown name \"" + name + "\"");
  }
  return s;
}

}  // namespace gkdv
