// Copyright (c) the gkdv contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gkdv {

struct QuadratureRule {
  std::vector<double> points;   // on the reference cell [0,1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with n points on [0,1], exact for polynomials of
/// degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule q;
  switch (n) {
    case 1:
      q.points = {0.5};
      q.weights = {1.0};
      break;
    case 2: {
      const double d = 0.28867513459481288225;  // 1/(2*sqrt(3))
      q.points = {0.5 - d, 0.5 + d};
      q.weights = {0.5, 0.5};
      break;
    }
    case 3: {
      const double d = 0.38729833462074168852;  // sqrt(3/5)/2
      q.points = {0.5 - d, 0.5, 0.5 + d};
      q.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    case 4: {
      const double d1 = 0.16999052179242812702;
      const double d2 = 0.43056815579702628761;
      const double w1 = 0.32607257743127307131;
      const double w2 = 0.17392742256872692869;
      q.points = {0.5 - d2, 0.5 - d1, 0.5 + d1, 0.5 + d2};
      q.weights = {w2, w1, w1, w2};
      break;
    }
    case 5: {
      const double d1 = 0.26923465505284154552;
      const double d2 = 0.45308992296933199640;
      const double w0 = 0.28444444444444444444;
      const double w1 = 0.23931433524968323402;
      const double w2 = 0.11846344252809454376;
      q.points = {0.5 - d2, 0.5 - d1, 0.5, 0.5 + d1, 0.5 + d2};
      q.weights = {w2, w1, w0, w1, w2};
      break;
    }
    default:
      throw std::invalid_argument("gauss_legendre: unsupported point count");
  }
  return q;
}

/// Equispaced Lagrange shape functions of degree k on the reference cell
/// [0,1], nodes at m/k. Values for all k+1 functions at xi.
inline void lagrange_values(int degree, double xi, std::array<double, 4>& out) {
  switch (degree) {
    case 1:
      out[0] = 1.0 - xi;
      out[1] = xi;
      break;
    case 2:
      out[0] = (1.0 - xi) * (1.0 - 2.0 * xi);
      out[1] = 4.0 * xi * (1.0 - xi);
      out[2] = xi * (2.0 * xi - 1.0);
      break;
    case 3:
      out[0] = -(3.0 * xi - 1.0) * (3.0 * xi - 2.0) * (xi - 1.0) / 2.0;
      out[1] = 9.0 * xi * (3.0 * xi - 2.0) * (xi - 1.0) / 2.0;
      out[2] = -9.0 * xi * (3.0 * xi - 1.0) * (xi - 1.0) / 2.0;
      out[3] = xi * (3.0 * xi - 1.0) * (3.0 * xi - 2.0) / 2.0;
      break;
    default:
      throw std::invalid_argument("lagrange_values: degree must be 1, 2, or 3");
  }
}

/// Derivatives with respect to xi of the reference shape functions.
inline void lagrange_derivs(int degree, double xi, std::array<double, 4>& out) {
  switch (degree) {
    case 1:
      out[0] = -1.0;
      out[1] = 1.0;
      break;
    case 2:
      out[0] = 4.0 * xi - 3.0;
      out[1] = 4.0 - 8.0 * xi;
      out[2] = 4.0 * xi - 1.0;
      break;
    case 3:
      out[0] = -(27.0 * xi * xi - 36.0 * xi + 11.0) / 2.0;
      out[1] = (81.0 * xi * xi - 90.0 * xi + 18.0) / 2.0;
      out[2] = -(81.0 * xi * xi - 72.0 * xi + 9.0) / 2.0;
      out[3] = (27.0 * xi * xi - 18.0 * xi + 2.0) / 2.0;
      break;
    default:
      throw std::invalid_argument("lagrange_derivs: degree must be 1, 2, or 3");
  }
}

}  // namespace gkdv
