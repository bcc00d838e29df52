#pragma once

#include <vector>

namespace kernrank {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on (-1, 1).
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Laguerre rule for the weight e^{-u} on (0, inf), by Golub-Welsch.
QuadratureRule gauss_laguerre(int n);

/// `cells` equal panels on (a, b), each with an n-point Gauss-Legendre rule.
QuadratureRule composite_gauss_legendre(double a, double b, int cells, int n);

}  // namespace kernrank
