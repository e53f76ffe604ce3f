#pragma once

// Deterministic weak-form verifier. For a bump test function phi supported
// in D, the residual
//
//   R(phi) = sigma int_D <grad u, grad phi>
//          + (a^alpha A(d,-alpha) / 2) int int (u(x)-u(y)) (phi(x)-phi(y)) / |x-y|^{d+alpha}
//          - int_D <b, grad u> phi - int_D c u phi - int_D f phi
//
// vanishes for a weak solution. u is given on the interior lattice of D
// (grid data or an analytic candidate sampled there) and equals g on D^c.
//
// Quadrature on the h-lattice anchored at the domain's bounding-box corner:
//  * gradient, drift, potential and source terms: midpoint rule over the
//    bump support with central differences for grad u (one-sided next to the
//    boundary);
//  * fractional term, |x-y| <= R: symmetric midpoint double sum over lattice
//    pairs, plus the self-cell contribution (grad u . grad phi)/d times
//    int_cell |z|^{2-d-alpha};
//  * |x-y| > R: analytic shell mass omega_{d-1} R^-alpha / alpha and the
//    g-integral after the substitution t = (R/rho)^alpha.
// R is raised as needed so that every y with |x-y| > R lies in D^c.
//
// The residual is linear in the interior values, so it is assembled once as
// coefficients; R(u) is a dot product and Monte Carlo errors propagate
// through the same coefficients.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nlfk/estimator.hpp"
#include "nlfk/model.hpp"

namespace nlfk {

class TestFunction {
 public:
  /// Tensor bump prod_i exp(-1 / (1 - ((x_i - c_i)/w)^2)). The support cube
  /// [c - w, c + w]^d must lie strictly inside D.
  TestFunction(const Domain& domain, Point center, double width);

  const Point& center() const noexcept { return center_; }
  double width() const noexcept { return width_; }

  double operator()(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;

 private:
  Point center_;
  double width_;
};

/// Centered bump plus four bumps offset toward the boundary at half the
/// inradius (d = 1: offsets +-r/2 and +-r/4), widths min(r/3, 0.98 r / (2 sqrt d)).
std::vector<TestFunction> default_bumps(const Domain& domain);

struct QuadraturePolicy {
  double h = 1e-2;        // lattice spacing h_q
  double delta = 2e-2;    // near-diagonal split radius
  double far_radius = 0;  // R; 0 or too small selects the smallest admissible value
  int tail_nodes = 20;    // Gauss-Legendre nodes in t for the far g-integral
  int sphere_order = 16;

  void check() const;
};

struct WeakFormTerms {
  double gradient = 0.0;
  double fractional_near = 0.0;
  double fractional_mid = 0.0;
  double fractional_far = 0.0;
  double drift = 0.0;      // int <b, grad u> phi
  double potential = 0.0;  // int c u phi
  double source = 0.0;     // int f phi

  double fractional() const { return fractional_near + fractional_mid + fractional_far; }
  double e0() const { return gradient + fractional() - drift; }
  double residual() const { return e0() - potential - source; }
};

/// Residual of one bump, assembled as coefficients over interior nodes.
class WeakFormFunctional {
 public:
  WeakFormFunctional(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy);

  const std::vector<Point>& nodes() const noexcept { return nodes_; }
  const std::vector<std::vector<long>>& node_indices() const noexcept { return node_index_; }
  double far_radius() const noexcept { return far_radius_; }
  double phi_l1() const noexcept { return phi_l1_; }
  double grad_phi_l1() const noexcept { return grad_phi_l1_; }

  /// Values of u at nodes() (interior lattice points of D inside the
  /// interaction box).
  WeakFormTerms apply(std::span<const double> u_nodes) const;

  /// Coefficients of the residual with respect to each node value.
  std::vector<double> residual_coefficients() const;

  std::vector<double> sample(const Expr& u) const;
  std::vector<double> sample(const std::function<double(std::span<const double>)>& u) const;
  /// Grid values at nodes(); throws when the grid lattice differs or a node is missing.
  std::vector<double> sample(const GridFunction& u) const;
  std::vector<double> sample_std_errors(const GridFunction& u) const;

 private:
  friend double fractional_double_sum(const ProblemSpec&, const TestFunction&, const QuadraturePolicy&,
                                      std::span<const double>, bool);

  struct Term {
    std::vector<double> coef;
    double constant = 0.0;
    double eval(std::span<const double> u) const;
  };

  QuadraturePolicy policy_;
  double h_;
  std::vector<Point> nodes_;
  std::vector<std::vector<long>> node_index_;
  double far_radius_ = 0.0;
  double phi_l1_ = 0.0;
  double grad_phi_l1_ = 0.0;
  Term gradient_, near_, mid_, far_, drift_, potential_, source_;
};

/// Direct evaluation of the truncated symmetric double sum over all ordered
/// lattice pairs within R (no coefficient assembly, no self-cell or far
/// terms). With `swap_roles` each summand is evaluated as f(y, x).
double fractional_double_sum(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             std::span<const double> u_nodes, bool swap_roles);

WeakFormTerms bilinear_terms(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             const Expr& u);
WeakFormTerms bilinear_terms(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             const GridFunction& u);

double bilinear_E0(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy, const Expr& u);
double bilinear_E0(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                   const GridFunction& u);
double residual(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy, const Expr& u);
double residual(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                const GridFunction& u);

/// int_{|z| > R} |z|^{-d-alpha} dz = omega_{d-1} R^-alpha / alpha.
double kernel_tail_mass(int d, double alpha, double R);

/// int over [-1/2, 1/2]^d of |z|^{2-d-alpha} dz.
double unit_cell_singular_integral(int d, double alpha);

/// Pointwise Delta^{alpha/2} u(x) = (A/2) int (u(x+z) + u(x-z) - 2u(x)) / |z|^{d+alpha} dz by
/// tanh-sinh panels in the radius (split at `radial_breaks`) and a sphere
/// rule in the angle; the tail beyond the last break uses t = (R/rho)^alpha.
double fractional_laplacian_at(const std::function<double(std::span<const double>)>& u,
                               std::span<const double> x, double alpha, std::span<const double> radial_breaks,
                               int sphere_order = 16);

struct BumpReport {
  Point center;
  double width = 0.0;
  WeakFormTerms terms;
  double residual = 0.0;
  double norm = 0.0;        // ||phi||_1 + ||grad phi||_1
  double normalized = 0.0;  // |residual| / norm
  double sigma = 0.0;       // propagated Monte Carlo standard error of the residual
  double threshold = 0.0;   // on the normalized residual
  bool pass = false;
};

struct VerifyReport {
  std::vector<BumpReport> bumps;
  double h = 0.0;
  double dt = 0.0;
  double tol_c = 0.0;
  double stderr_norm = 0.0;  // max over bumps of sigma / norm
  double max_normalized = 0.0;
  double measured_c = 0.0;  // max_normalized / (stderr_norm + h + dt)
  bool pass = false;
};

/// Pass iff every bump has |R|/norm <= tol_c (h + dt) + 3 sigma/norm.
VerifyReport verify_solution(const GridFunction& u, const ProblemSpec& spec, std::span<const TestFunction> bumps,
                             const QuadraturePolicy& policy, double tol_c, double dt);
VerifyReport verify_solution(const Expr& u, const ProblemSpec& spec, std::span<const TestFunction> bumps,
                             const QuadraturePolicy& policy, double tol_c, double dt);

}  // namespace nlfk
