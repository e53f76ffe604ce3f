#pragma once

// Small fixed rules shared by the Kato diagnostics and the weak-form verifier.

#include <vector>

namespace nlfk {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b]; n must be one of 5, 10, 20, 30.
Rule1D gauss_legendre(int n, double a, double b);

/// Directions on S^{d-1} with weights summing to its surface area.
/// Supported for d = 1, 2, 3; `order` controls the resolution.
struct SphereRule {
  int dim = 0;
  std::vector<std::vector<double>> directions;
  std::vector<double> weights;
};

SphereRule sphere_rule(int d, int order);

/// Surface area of the unit sphere S^{d-1} (2 for d = 1).
double sphere_area(int d);

/// Volume of the unit ball in R^d.
double ball_volume(int d);

}  // namespace nlfk
