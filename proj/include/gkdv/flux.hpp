// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace gkdv {

enum class Convexity { convex, concave, general };

/// Scalar hyperbolic flux f(u) with exact derivative and, for the built-in
/// models, the entropy flux paired with eta(u) = u^2/2.
struct FluxModel {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> slope;
  Convexity convexity = Convexity::general;
  std::optional<double> lipschitz_hint;
  std::function<double(double)> square_entropy_flux;  // q with q'(u) = u f'(u)
};

namespace detail {
inline double int_pow(double u, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= u;
  return r;
}
}  // namespace detail

/// Built-in fluxes:
///   kdv6            f(u) = 3u^2        (the 6u u_x nonlinearity)
///   burgers         f(u) = u^2/2
///   linear          f(u) = a u         (param = a)
///   poly_p          f(u) = u^p/p       (param = p, integer >= 2)
///   linear_plus_poly f(u) = u + u^p    (param = p, integer >= 2)
inline FluxModel make_builtin(const std::string& name, double param = 0.0) {
  FluxModel f;
  f.name = name;
  if (name == "kdv6") {
    f.value = [](double u) { return 3.0 * u * u; };
    f.slope = [](double u) { return 6.0 * u; };
    f.convexity = Convexity::convex;
    f.square_entropy_flux = [](double u) { return 2.0 * u * u * u; };
  } else if (name == "burgers") {
    f.value = [](double u) { return 0.5 * u * u; };
    f.slope = [](double u) { return u; };
    f.convexity = Convexity::convex;
    f.square_entropy_flux = [](double u) { return u * u * u / 3.0; };
  } else if (name == "linear") {
    const double a = param;
    f.value = [a](double u) { return a * u; };
    f.slope = [a](double) { return a; };
    f.convexity = Convexity::convex;
    f.lipschitz_hint = std::abs(a);
    f.square_entropy_flux = [a](double u) { return 0.5 * a * u * u; };
  } else if (name == "poly_p" || name == "linear_plus_poly") {
    const int p = static_cast<int>(param);
    if (p < 2 || static_cast<double>(p) != param)
      throw std::invalid_argument("make_builtin: " + name + " needs an integer exponent >= 2");
    const bool plus_linear = (name == "linear_plus_poly");
    f.value = [p, plus_linear](double u) {
      const double poly = detail::int_pow(u, p);
      return plus_linear ? u + poly : poly / p;
    };
    f.slope = [p, plus_linear](double u) {
      const double dp = detail::int_pow(u, p - 1);
      return plus_linear ? 1.0 + p * dp : dp;
    };
    // f'' = (p-1) u^{p-2} (scaled); sign-definite only for even p.
    f.convexity = (p % 2 == 0) ? Convexity::convex : Convexity::general;
    f.square_entropy_flux = [p, plus_linear](double u) {
      const double q_poly = plus_linear ? p * detail::int_pow(u, p + 1) / (p + 1)
                                        : detail::int_pow(u, p + 1) / (p + 1);
      return plus_linear ? 0.5 * u * u + q_poly : q_poly;
    };
  } else {
    throw std::invalid_argument("make_builtin: unknown flux model \"" + name + "\"");
  }
  return f;
}

/// Upper bound on the maximal wave speed of the Riemann problem with states
/// (uL, uR). Exact for convex or concave flux; a sampled envelope with a 1.1
/// safety factor otherwise.
inline double lambda_max(const FluxModel& flux, double uL, double uR) {
  if (!std::isfinite(uL) || !std::isfinite(uR))
    throw std::invalid_argument("lambda_max: non-finite states");
  double lam;
  if (uL == uR) {
    lam = std::abs(flux.slope(uL));
  } else if (flux.convexity == Convexity::convex || flux.convexity == Convexity::concave) {
    const double shock = (flux.value(uR) - flux.value(uL)) / (uR - uL);
    lam = std::max({std::abs(flux.slope(uL)), std::abs(flux.slope(uR)), std::abs(shock)});
  } else {
    const double lo = std::min(uL, uR), hi = std::max(uL, uR);
    double env = 0.0;
    constexpr int samples = 64;
    for (int s = 0; s < samples; ++s) {
      const double u = lo + (hi - lo) * s / (samples - 1);
      env = std::max(env, std::abs(flux.slope(u)));
    }
    lam = 1.1 * env;
  }
  if (!std::isfinite(lam)) throw std::runtime_error("lambda_max: flux model produced a non-finite bound");
  return lam;
}

}  // namespace gkdv
