#pragma once

// Problem statement for
//   (sigma Delta + a^alpha Delta^{alpha/2} + b.grad + c) u + f = 0  in D,
//   u = g  on D^c,
// together with the fractional-Laplacian constant and coefficient
// diagnostics.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlfk/expr.hpp"
#include "nlfk/geometry.hpp"

namespace nlfk {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProblemSpec {
  /// b = 0, c = 0, f = 0, g = 1, alpha = 1, a = 1, sigma = 1 on the domain.
  explicit ProblemSpec(Domain dom);

  int dim = 1;
  double alpha = 1.0;
  double a = 1.0;       // stable amplitude
  int sigma = 1;        // 1: Delta present, 0: pure stable (validation mode)
  Domain domain;
  std::vector<Expr> drift;  // b; one field per coordinate, treated as 0 off D
  Expr c;
  Expr f;
  Expr g;
  double g_bound = 1.0;  // declared sup |g| over D^c
  double kato_warn_threshold = 1.0;
  double norm_p = 0.0;  // exponent for ||c+||_{L^p}; 0 selects p = dim

  /// Throws SpecError on any structural invariant violation.
  void check() const;

  /// False when every drift component is the constant 0.
  bool has_drift() const noexcept;
  /// Writes b(x) into out, or zeros when x is outside D.
  void drift_at(std::span<const double> x, std::span<double> out) const;
};

/// A(d, -alpha) = alpha 2^(alpha-1) pi^(-d/2) Gamma((d+alpha)/2) / Gamma(1-alpha/2).
double frac_constant(int d, double alpha);

struct KatoProfile {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<Point> sample_points;
};

/// Estimates sup_x int_{|y-x|<=r} k_d(x-y) |phi(y)| 1_D(y) dy for each r on
/// the lattice of spacing lattice_h over the r_max-enlargement of D.
/// k_d = |z|^(2-d) for d >= 3, max(0, -ln|z|) for d = 2, 1 for d = 1.
/// Radii must be positive and sorted in decreasing order.
KatoProfile kato_profile(const Expr& field, const Domain& domain, std::span<const double> radii,
                         double lattice_h);

/// ||max(field, 0)||_{L^p(D)} by midpoint quadrature on the h-lattice.
double positive_part_norm(const Expr& field, const Domain& domain, double p, double h);

struct SpecWarning {
  std::string code;  // "c_norm", "g_bound", "drift_clamped", "probe_eval"
  std::string message;
  double value = 0.0;
};

/// Advisory checks; never fails except through ProblemSpec::check().
std::vector<SpecWarning> validate_spec(const ProblemSpec& spec);

}  // namespace nlfk
