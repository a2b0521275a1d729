// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gkdv/quadrature.hpp"
#include "gkdv/sparse.hpp"

namespace gkdv {

/// Nodal coefficient vector over the global DOFs of a mesh.
using StateVector = std::vector<double>;

/// Uniform periodic 1D mesh with equispaced Lagrange nodes of degree 1-3.
/// The right endpoint node is identified with DOF 0, so the global DOF count
/// is degree * num_cells.
struct Mesh {
  double a = 0.0;
  double b = 1.0;
  int num_cells = 0;
  int degree = 1;
  std::vector<double> dof_coords;                 // length I, strictly increasing in [a,b)
  std::vector<std::array<int, 4>> cell_to_dofs;   // degree+1 entries used per cell

  int dof_count() const { return degree * num_cells; }
  double length() const { return b - a; }
  double cell_width() const { return (b - a) / num_cells; }
  /// Reported DOF count; the periodically identified endpoint is counted once
  /// more to match the usual tabulation of periodic meshes.
  int reported_dofs() const { return dof_count() + 1; }
};

inline Mesh build_mesh(double a, double b, int num_cells, int degree) {
  if (!(b > a)) throw std::invalid_argument("build_mesh: requires b > a");
  if (num_cells < 3) throw std::invalid_argument("build_mesh: requires num_cells >= 3");
  if (degree < 1 || degree > 3) throw std::invalid_argument("build_mesh: degree must be 1, 2, or 3");
  Mesh mesh;
  mesh.a = a;
  mesh.b = b;
  mesh.num_cells = num_cells;
  mesh.degree = degree;
  const int I = degree * num_cells;
  const double h = (b - a) / num_cells;
  mesh.dof_coords.resize(static_cast<size_t>(I));
  for (int c = 0; c < num_cells; ++c)
    for (int m = 0; m < degree; ++m)
      mesh.dof_coords[static_cast<size_t>(c) * degree + m] = a + h * (c + static_cast<double>(m) / degree);
  mesh.cell_to_dofs.resize(static_cast<size_t>(num_cells));
  for (int c = 0; c < num_cells; ++c) {
    for (int m = 0; m <= degree; ++m) mesh.cell_to_dofs[c][m] = (c * degree + m) % I;
  }
  return mesh;
}

/// Nodal interpolation of f onto the mesh.
inline StateVector interpolate(const std::function<double(double)>& f, const Mesh& mesh) {
  StateVector u(mesh.dof_coords.size());
  for (size_t i = 0; i < u.size(); ++i) {
    u[i] = f(mesh.dof_coords[i]);
    if (!std::isfinite(u[i]))
      throw std::invalid_argument("interpolate: non-finite value at a DOF coordinate");
  }
  return u;
}

/// Evaluate the finite element function with coefficients U at point x
/// (wrapped periodically into [a,b)).
inline double eval_fe(const Mesh& mesh, const StateVector& U, double x) {
  const double L = mesh.length();
  double y = std::fmod(x - mesh.a, L);
  if (y < 0) y += L;
  const double h = mesh.cell_width();
  int c = static_cast<int>(y / h);
  if (c >= mesh.num_cells) c = mesh.num_cells - 1;
  const double xi = (y - c * h) / h;
  std::array<double, 4> n{};
  lagrange_values(mesh.degree, xi, n);
  double s = 0.0;
  for (int m = 0; m <= mesh.degree; ++m) s += n[m] * U[mesh.cell_to_dofs[c][m]];
  return s;
}

/// Derivative of the finite element function at x (one-sided at cell joints).
inline double eval_fe_deriv(const Mesh& mesh, const StateVector& U, double x) {
  const double L = mesh.length();
  double y = std::fmod(x - mesh.a, L);
  if (y < 0) y += L;
  const double h = mesh.cell_width();
  int c = static_cast<int>(y / h);
  if (c >= mesh.num_cells) c = mesh.num_cells - 1;
  const double xi = (y - c * h) / h;
  std::array<double, 4> d{};
  lagrange_derivs(mesh.degree, xi, d);
  double s = 0.0;
  for (int m = 0; m <= mesh.degree; ++m) s += d[m] * U[mesh.cell_to_dofs[c][m]];
  return s / h;
}

}  // namespace gkdv
