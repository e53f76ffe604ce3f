#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "nlfk/weakform.hpp"

using namespace nlfk;

namespace {

// Delta^{alpha/2} (1 - |x|^2)_+^{alpha/2} is this negative constant inside the unit ball.
double torsion_constant(int d, double alpha) {
  return std::pow(2.0, alpha) * std::tgamma(1.0 + alpha / 2.0) * std::tgamma((d + alpha) / 2.0) /
         std::tgamma(d / 2.0);
}

ProblemSpec pure_stable_interval() {
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.sigma = 0;
  s.a = 1.0;
  s.alpha = 1.0;
  s.f = constant_field(1.0, 1);
  s.g = constant_field(0.0, 1);
  s.g_bound = 0.0;
  return s;
}

QuadraturePolicy fine(double h) {
  QuadraturePolicy q;
  q.h = h;
  q.delta = 2.0 * h;
  return q;
}

}  // namespace

TEST_CASE("kernel tail mass and the unit-cell integral") {
  CHECK(kernel_tail_mass(1, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(kernel_tail_mass(2, 1.5, 1.0) == doctest::Approx(2.0 * std::numbers::pi / 1.5));
  CHECK(kernel_tail_mass(3, 0.5, 4.0) == doctest::Approx(4.0 * std::numbers::pi * 0.5 / 0.5));
  for (double a : {0.5, 1.0, 1.5}) CHECK(unit_cell_singular_integral(1, a) == doctest::Approx(std::pow(0.5, 1.0 - a) / (2.0 - a)));
  // 2-D against a fine midpoint sum.
  const int n = 2000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += std::pow(std::hypot(-0.5 + (i + 0.5) * h, -0.5 + (j + 0.5) * h), -0.5);
  CHECK(unit_cell_singular_integral(2, 0.5) == doctest::Approx(s * h * h).epsilon(1e-3));
}

TEST_CASE("pointwise fractional Laplacian of the torsion profile") {
  auto profile = [](double alpha) {
    return [alpha](std::span<const double> x) {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      return r2 < 1.0 ? std::pow(1.0 - r2, alpha / 2.0) : 0.0;
    };
  };
  const std::vector<double> b1{1.0};
  CHECK(fractional_laplacian_at(profile(1.0), std::vector<double>{0.0}, 1.0, b1) ==
        doctest::Approx(-torsion_constant(1, 1.0)).epsilon(1e-6));
  CHECK(fractional_laplacian_at(profile(1.5), std::vector<double>{0.0, 0.0}, 1.5, b1) ==
        doctest::Approx(-torsion_constant(2, 1.5)).epsilon(1e-5));
  const double r = std::hypot(0.3, 0.2);
  const std::vector<double> b2{1.0 - r, 1.0 + r};
  CHECK(fractional_laplacian_at(profile(1.5), std::vector<double>{0.3, 0.2}, 1.5, b2, 32) ==
        doctest::Approx(-torsion_constant(2, 1.5)).epsilon(1e-2));
}

TEST_CASE("constant function has zero residual when g matches") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.alpha = 1.2;
  for (const TestFunction& phi : default_bumps(s.domain)) {
    const WeakFormTerms t = bilinear_terms(s, phi, fine(0.04), constant_field(1.0, 2));
    CHECK(std::fabs(t.residual()) < 1e-10);
  }
}

TEST_CASE("double sum is symmetric and matches the assembled pair terms") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.alpha = 1.5;
  const TestFunction phi(s.domain, Point{0.2, 0.0}, 0.3);
  const QuadraturePolicy q = fine(0.05);
  const WeakFormFunctional wf(s, phi, q);
  const std::vector<double> u = wf.sample(parse_expression("x1 * x2 + 1", 2));
  const double a = fractional_double_sum(s, phi, q, u, false);
  const double b = fractional_double_sum(s, phi, q, u, true);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  // u = 0 in D, g = 1 outside: no self-cell contribution, so the pair terms are the whole sum.
  const std::vector<double> zero(wf.nodes().size(), 0.0);
  const WeakFormTerms t = wf.apply(zero);
  CHECK(t.fractional_near + t.fractional_mid == doctest::Approx(fractional_double_sum(s, phi, q, zero, false)).epsilon(1e-10));
}

TEST_CASE("residual is linear in the node values") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.g = constant_field(0.0, 2);
  s.g_bound = 0.0;
  s.drift = {constant_field(0.5, 2), parse_expression("x1", 2)};
  s.c = constant_field(-0.3, 2);
  const TestFunction phi(s.domain, Point{0.0, 0.1}, 0.3);
  const WeakFormFunctional wf(s, phi, fine(0.05));
  const std::vector<double> u = wf.sample(parse_expression("1 - x1^2 - x2^2", 2));
  const std::vector<double> coef = wf.residual_coefficients();
  const double dot = std::inner_product(coef.begin(), coef.end(), u.begin(), 0.0);
  CHECK(wf.apply(u).residual() == doctest::Approx(dot).epsilon(1e-10));  // f = 0 and g = 0: no constant part
}

TEST_CASE("fractional torsion candidate passes; wrong candidates fail") {
  const ProblemSpec s = pure_stable_interval();
  const auto bumps = default_bumps(s.domain);
  REQUIRE(bumps.size() == 5);
  const QuadraturePolicy q = fine(1e-3);
  const VerifyReport good = verify_solution(parse_expression("sqrt(1 - x1^2)", 1), s, bumps, q, 1.0, 0.0);
  CHECK(good.pass);
  CHECK(good.max_normalized < 1e-3);
  const VerifyReport poly = verify_solution(parse_expression("1 - x1^2", 1), s, bumps, q, 1.0, 0.0);
  CHECK_FALSE(poly.pass);
  const VerifyReport scaled = verify_solution(parse_expression("0.9 * sqrt(1 - x1^2)", 1), s, bumps, q, 1.0, 0.0);
  CHECK_FALSE(scaled.pass);
}

TEST_CASE("grid data and the analytic candidate give the same terms") {
  const ProblemSpec s = pure_stable_interval();
  const QuadraturePolicy q = fine(0.01);
  const Expr u = parse_expression("sqrt(1 - x1^2)", 1);
  GridFunction g(s.domain, 0.01);
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = u(g.points()[i]);
  const TestFunction phi = default_bumps(s.domain)[1];
  CHECK(bilinear_E0(s, phi, q, g) == doctest::Approx(bilinear_E0(s, phi, q, u)).epsilon(1e-12));
  const GridFunction coarse(s.domain, 0.02);
  CHECK_THROWS(residual(s, phi, q, coarse));
}

TEST_CASE("bumps and policies are validated") {
  const Domain d = Domain::ball({0.0, 0.0}, 1.0);
  CHECK_THROWS(TestFunction(d, Point{0.8, 0.0}, 0.3));
  const TestFunction phi(d, Point{0.0, 0.0}, 0.5);
  CHECK(phi(Point{0.0, 0.0}) == doctest::Approx(std::exp(-2.0)));
  CHECK(phi(Point{0.5, 0.0}) == 0.0);
  std::vector<double> grad(2);
  phi.gradient(Point{0.0, 0.0}, grad);
  CHECK(grad[0] == doctest::Approx(0.0));
  for (const TestFunction& b : default_bumps(d)) CHECK(b.width() == doctest::Approx(std::min(1.0 / 3.0, 0.98 / (2.0 * std::sqrt(2.0)))));
  QuadraturePolicy q;
  q.delta = q.h;
  CHECK_THROWS(q.check());
  q = QuadraturePolicy{};
  q.tail_nodes = 7;
  CHECK_THROWS(q.check());
}
