// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

/// Matched ERK/EDIRK tableau pair sharing the abscissae c. Stages are
/// numbered 1..s+1 with the assembly written as stage s+1, so `ae` is
/// (s+1) x s strictly lower triangular and `ai` is (s+1) x (s+1) lower
/// triangular with an explicit first stage.
struct ButcherPair {
  std::string name;
  int s = 0;
  std::vector<double> c;                    // length s+1, c[0]=0, c[s]=1
  std::vector<std::vector<double>> ae;      // (s+1) x s
  std::vector<std::vector<double>> ai;      // (s+1) x (s+1)
  double dc_max = 0.0;
  bool equidistributed = false;

  /// Increment weights a_{l,k} - a_{l-1,k} for stage l in {2..s+1}
  /// (0-based row r = l-1), explicit part, k = 1..l-1.
  std::vector<double> explicit_deltas(int r) const {
    std::vector<double> d(static_cast<size_t>(r));
    for (int k = 0; k < r; ++k) d[k] = ae[r][k] - ae[r - 1][k];
    return d;
  }
  std::vector<double> implicit_deltas(int r) const {
    std::vector<double> d(static_cast<size_t>(r));
    for (int k = 0; k < r; ++k) d[k] = ai[r][k] - ai[r - 1][k];
    return d;
  }
  double implicit_diagonal(int r) const { return ai[r][r]; }
};

inline ButcherPair validate_tableau(ButcherPair p) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("validate_tableau(" + p.name + "): " + what);
  };
  const int s = p.s;
  if (s < 1) fail("stage count must be at least 1");
  if (static_cast<int>(p.c.size()) != s + 1) fail("abscissae must have length s+1");
  if (static_cast<int>(p.ae.size()) != s + 1 || static_cast<int>(p.ai.size()) != s + 1)
    fail("tableaux must have s+1 rows");
  for (int r = 0; r <= s; ++r) {
    if (static_cast<int>(p.ae[r].size()) != s) fail("explicit tableau must have s columns");
    if (static_cast<int>(p.ai[r].size()) != s + 1) fail("implicit tableau must have s+1 columns");
  }
  const double tol = 1e-13;
  if (std::abs(p.c[0]) > tol) fail("first abscissa c_1 must be 0");
  if (std::abs(p.c[s] - 1.0) > tol) fail("final abscissa must be 1");
  for (int r = 1; r <= s; ++r)
    if (p.c[r] < p.c[r - 1] - tol) fail("abscissae must be nondecreasing");
  for (int r = 0; r <= s; ++r)
    for (int k = r; k < s; ++k)
      if (p.ae[r][k] != 0.0) fail("explicit tableau must be strictly lower triangular");
  if (p.ai[0][0] != 0.0) fail("implicit tableau must have a zero (1,1) entry");
  for (int r = 0; r <= s; ++r)
    for (int k = r + 1; k <= s; ++k)
      if (p.ai[r][k] != 0.0) fail("implicit tableau must be lower triangular");
  for (int r = 1; r < s; ++r)
    if (p.ai[r][r] == 0.0) fail("implicit tableau needs a nonzero diagonal from stage 2");
  for (int r = 0; r <= s; ++r) {
    double se = 0.0, si = 0.0;
    for (double v : p.ae[r]) se += v;
    for (double v : p.ai[r]) si += v;
    if (std::abs(se - p.c[r]) > tol)
      fail("explicit row " + std::to_string(r + 1) + " sum does not match its abscissa");
    if (std::abs(si - p.c[r]) > tol)
      fail("implicit row " + std::to_string(r + 1) + " sum does not match its abscissa");
  }
  p.dc_max = 0.0;
  for (int r = 1; r <= s; ++r) p.dc_max = std::max(p.dc_max, p.c[r] - p.c[r - 1]);
  if (p.dc_max < 1.0 / s - tol) fail("largest abscissa gap is below 1/s");
  p.equidistributed = true;
  for (int r = 0; r <= s; ++r)
    if (std::abs(p.c[r] - static_cast<double>(r) / s) > 1e-14) p.equidistributed = false;
  return p;
}

namespace detail {
inline double parse_number(const std::string& tok) {
  const auto slash = tok.find('/');
  if (slash != std::string::npos) {
    const double num = std::stod(tok.substr(0, slash));
    const double den = std::stod(tok.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("registry: zero denominator in " + tok);
    return num / den;
  }
  return std::stod(tok);
}
}  // namespace detail

/// Parses a plain-text tableau registry. Format, one block per scheme:
///   scheme <name>
///   stages <s>
///   c <s+1 numbers>
///   ae        (followed by s+1 rows of s numbers)
///   ai        (followed by s+1 rows of s+1 numbers)
///   end
/// Numbers are decimal or rational p/q strings; '#' starts a comment.
inline std::vector<ButcherPair> parse_registry(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::vector<ButcherPair> out;
  size_t pos = 0;
  auto next = [&]() -> std::string {
    if (pos >= tokens.size()) throw std::invalid_argument("registry: unexpected end of input");
    return tokens[pos++];
  };
  while (pos < tokens.size()) {
    if (next() != "scheme") throw std::invalid_argument("registry: expected 'scheme'");
    ButcherPair p;
    p.name = next();
    if (next() != "stages") throw std::invalid_argument("registry: expected 'stages'");
    p.s = static_cast<int>(detail::parse_number(next()));
    if (p.s < 1 || p.s > 16) throw std::invalid_argument("registry: bad stage count");
    if (next() != "c") throw std::invalid_argument("registry: expected 'c'");
    for (int r = 0; r <= p.s; ++r) p.c.push_back(detail::parse_number(next()));
    if (next() != "ae") throw std::invalid_argument("registry: expected 'ae'");
    p.ae.assign(static_cast<size_t>(p.s) + 1, std::vector<double>(static_cast<size_t>(p.s)));
    for (int r = 0; r <= p.s; ++r)
      for (int k = 0; k < p.s; ++k) p.ae[r][k] = detail::parse_number(next());
    if (next() != "ai") throw std::invalid_argument("registry: expected 'ai'");
    p.ai.assign(static_cast<size_t>(p.s) + 1, std::vector<double>(static_cast<size_t>(p.s) + 1));
    for (int r = 0; r <= p.s; ++r)
      for (int k = 0; k <= p.s; ++k) p.ai[r][k] = detail::parse_number(next());
    if (next() != "end") throw std::invalid_argument("registry: expected 'end'");
    out.push_back(validate_tableau(std::move(p)));
  }
  return out;
}

/// Built-in schemes. euler is the degenerate one-stage pair (forward Euler
/// hyperbolic prediction, backward Euler dispersive update). imex22 pairs the
/// explicit midpoint rule with the stiffly accurate two-stage EDIRK of
/// diagonal 1 - 1/sqrt(2); the implicit component is L-stable, which damps
/// unresolved grid-scale oscillations instead of carrying them forever.
/// imex33 pairs the classical third-order scheme with nodes (0,1/3,2/3)
/// against an EDIRK with equal interior diagonals (3+sqrt(3))/6; this is the
/// unique order-3 pair on equi-distributed abscissae whose implicit component
/// is A-stable with a real diagonal, at the least-damped parameter choice.
inline const char* builtin_registry_text() {
  return R"(# IMEX tableau registry: matched ERK/EDIRK pairs with shared abscissae.
scheme euler
stages 1
c 0 1
ae
0
1
ai
0 0
0 1
end

scheme imex22
stages 2
c 0 1/2 1
ae
0 0
1/2 0
0 1
ai
0 0 0
0.20710678118654752 0.29289321881345248 0
0.29289321881345248 0.41421356237309505 0.29289321881345248
end

scheme imex33
stages 3
c 0 1/3 2/3 1
ae
0 0 0
1/3 0 0
0 2/3 0
1/4 0 3/4
ai
0 0 0 0
-0.45534180126147955 0.78867513459481288 0 0
0.78867513459481288 -0.91068360252295910 0.78867513459481288 0
1/4 0 3/4 0
end
)";
}

inline ButcherPair find_scheme(const std::string& name, const std::string& registry_text) {
  for (auto& p : parse_registry(registry_text))
    if (p.name == name) return p;
  throw std::invalid_argument("unknown scheme \"" + name + "\" in tableau registry");
}

inline ButcherPair find_scheme(const std::string& name) {
  return find_scheme(name, builtin_registry_text());
}

}  // namespace gkdv
