// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "gkdv/flux.hpp"
#include "support.hpp"

using namespace gkdv;
namespace ts = testing_support;
using Catch::Matchers::WithinRel;

TEST_CASE("built-in fluxes evaluate with exact derivatives", "[flux]") {
  const FluxModel kdv6 = make_builtin("kdv6");
  REQUIRE_THAT(kdv6.value(2.0), WithinRel(12.0, 1e-15));
  REQUIRE_THAT(kdv6.slope(2.0), WithinRel(12.0, 1e-15));

  const FluxModel burgers = make_builtin("burgers");
  REQUIRE_THAT(burgers.value(1.0), WithinRel(0.5, 1e-15));
  REQUIRE_THAT(burgers.slope(1.0), WithinRel(1.0, 1e-15));

  const FluxModel poly3 = make_builtin("poly_p", 3.0);
  REQUIRE_THAT(poly3.value(2.0), WithinRel(8.0 / 3.0, 1e-15));
  REQUIRE_THAT(poly3.slope(2.0), WithinRel(4.0, 1e-15));

  const FluxModel lin = make_builtin("linear", -2.5);
  REQUIRE_THAT(lin.value(3.0), WithinRel(-7.5, 1e-15));
  REQUIRE(lin.slope(100.0) == -2.5);
  REQUIRE(lin.lipschitz_hint.value() == 2.5);

  const FluxModel lp = make_builtin("linear_plus_poly", 3.0);
  REQUIRE_THAT(lp.value(2.0), WithinRel(10.0, 1e-15));
  REQUIRE_THAT(lp.slope(2.0), WithinRel(13.0, 1e-15));

  REQUIRE_THROWS_AS(make_builtin("relativistic"), std::invalid_argument);
  REQUIRE_THROWS_AS(make_builtin("poly_p", 1.0), std::invalid_argument);
}

TEST_CASE("convexity flags match the second derivative sign", "[flux]") {
  REQUIRE(make_builtin("kdv6").convexity == Convexity::convex);
  REQUIRE(make_builtin("burgers").convexity == Convexity::convex);
  REQUIRE(make_builtin("linear", 2.0).convexity == Convexity::convex);
  REQUIRE(make_builtin("poly_p", 4.0).convexity == Convexity::convex);
  REQUIRE(make_builtin("poly_p", 3.0).convexity == Convexity::general);
  REQUIRE(make_builtin("linear_plus_poly", 3.0).convexity == Convexity::general);
}

TEST_CASE("square entropy flux satisfies q' = u f' on samples", "[flux]") {
  for (const auto& [name, param] : std::vector<std::pair<std::string, double>>{
           {"kdv6", 0.0}, {"burgers", 0.0}, {"linear", 1.7}, {"poly_p", 3.0},
           {"linear_plus_poly", 4.0}}) {
    const FluxModel f = make_builtin(name, param);
    for (double u : {-1.3, -0.2, 0.4, 2.1}) {
      const double h = 1e-6;
      const double dq = (f.square_entropy_flux(u + h) - f.square_entropy_flux(u - h)) / (2 * h);
      REQUIRE_THAT(dq, Catch::Matchers::WithinAbs(u * f.slope(u), 1e-6 * (1.0 + std::abs(u * f.slope(u)))));
    }
  }
}

TEST_CASE("lambda_max reproduces the Riemann-fan bounds", "[flux]") {
  const FluxModel kdv6 = make_builtin("kdv6");
  REQUIRE_THAT(lambda_max(kdv6, 0.0, 2.0), WithinRel(12.0, 1e-14));

  const FluxModel burgers = make_builtin("burgers");
  REQUIRE_THAT(lambda_max(burgers, 2.0, -2.0), WithinRel(2.0, 1e-14));

  for (const auto& [name, param] : std::vector<std::pair<std::string, double>>{
           {"kdv6", 0.0}, {"poly_p", 3.0}, {"linear", -0.7}}) {
    const FluxModel f = make_builtin(name, param);
    for (double c : {-2.0, 0.0, 0.3, 1.9})
      REQUIRE_THAT(lambda_max(f, c, c), Catch::Matchers::WithinAbs(std::abs(f.slope(c)), 1e-14));
  }
}

TEST_CASE("lambda_max is symmetric and dominates sampled characteristic speeds", "[flux]") {
  auto rng = ts::make_rng(99);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (const auto& [name, param] : std::vector<std::pair<std::string, double>>{
           {"kdv6", 0.0}, {"burgers", 0.0}, {"poly_p", 3.0}, {"linear_plus_poly", 3.0}}) {
    const FluxModel f = make_builtin(name, param);
    for (int trial = 0; trial < 50; ++trial) {
      const double uL = dist(rng), uR = dist(rng);
      const double lam = lambda_max(f, uL, uR);
      REQUIRE_THAT(lam, WithinRel(lambda_max(f, uR, uL), 1e-14));
      REQUIRE(lam >= std::abs(f.slope(uL)) * (1.0 - 1e-14));
      REQUIRE(lam >= std::abs(f.slope(uR)) * (1.0 - 1e-14));
      if (f.convexity == Convexity::convex) {
        const double lo = std::min(uL, uR), hi = std::max(uL, uR);
        for (int s = 0; s < 1000; ++s) {
          const double u = lo + (hi - lo) * s / 999.0;
          REQUIRE(lam >= std::abs(f.slope(u)) * (1.0 - 1e-12));
        }
      }
    }
  }
}
