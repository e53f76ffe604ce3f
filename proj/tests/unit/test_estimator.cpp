#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlfk/estimator.hpp"
#include "nlfk/quadrature.hpp"

using namespace nlfk;

namespace {
ProblemSpec mixed_disk() {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.alpha = 1.0;
  s.a = 1.0;
  s.drift = {constant_field(0.5, 2), constant_field(0.0, 2)};
  s.c = constant_field(-0.2, 2);
  s.f = constant_field(1.0, 2);
  s.g = constant_field(0.0, 2);
  s.g_bound = 0.0;
  return s;
}
}  // namespace

TEST_CASE("constant identity: mean 1 with zero standard error") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  SolveOptions o;
  o.n_paths = 2000;
  o.path.dt = 1e-2;
  const Estimate e = solve_point(s, Point{0.5, 0.5}, o);
  CHECK(e.mean == 1.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.n_paths == 2000);
  CHECK(e.n_censored == 0);
}

TEST_CASE("Brownian mean exit time from the centre of the unit interval") {
  // E_0 tau = (1 - x^2) / 2 for the generator Delta on (-1, 1).
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.a = 0.0;
  s.f = constant_field(1.0, 1);
  s.g = constant_field(0.0, 1);
  s.g_bound = 0.0;
  SolveOptions o;
  o.n_paths = 10000;
  o.path.dt = 1e-4;
  const Estimate e = solve_point(s, Point{0.0}, o);
  CHECK(std::fabs(e.mean - 0.5) < 3.0 * e.std_error + 0.012);
}

TEST_CASE("results do not depend on the worker count") {
  const ProblemSpec s = mixed_disk();
  SolveOptions o;
  o.n_paths = 300;
  o.path.dt = 5e-3;
  o.seed = 77;
  o.threads = 1;
  const GridSolution a = solve_grid(s, 0.4, o);
  o.threads = 3;
  const GridSolution b = solve_grid(s, 0.4, o);
  CHECK(a.u.values() == b.u.values());
  CHECK(a.u.std_errors() == b.u.std_errors());
  const Estimate p1 = solve_point(s, Point{0.1, 0.2}, o);
  o.threads = 1;
  const Estimate p2 = solve_point(s, Point{0.1, 0.2}, o);
  CHECK(p1.mean == p2.mean);
}

TEST_CASE("grid point k uses its own stream block") {
  const ProblemSpec s = mixed_disk();
  SolveOptions o;
  o.n_paths = 200;
  o.path.dt = 5e-3;
  o.seed = 9;
  const GridSolution g = solve_grid(s, 0.5, o);
  REQUIRE(g.u.size() > 2);
  const std::size_t k = 2;
  SolveOptions p = o;
  p.first_stream = k * static_cast<std::uint64_t>(o.n_paths);
  CHECK(solve_point(s, g.u.points()[k], p).mean == g.u.values()[k]);
}

TEST_CASE("estimate is linear in the source for g = 0") {
  ProblemSpec s = mixed_disk();
  SolveOptions o;
  o.n_paths = 500;
  o.path.dt = 5e-3;
  const Estimate one = solve_point(s, Point{0.0, 0.3}, o);
  s.f = constant_field(3.0, 2);
  const Estimate three = solve_point(s, Point{0.0, 0.3}, o);
  CHECK(three.mean == doctest::Approx(3.0 * one.mean).epsilon(1e-12));
  CHECK(three.std_error == doctest::Approx(3.0 * one.std_error).epsilon(1e-12));
}

TEST_CASE("censor policy and poisoned paths") {
  ProblemSpec s(Domain::ball({0.0}, 50.0));
  s.f = constant_field(1.0, 1);
  s.g = constant_field(7.0, 1);
  SolveOptions o;
  o.n_paths = 100;
  o.path.dt = 0.01;
  o.path.t_max = 0.2;
  const Estimate e = solve_point(s, Point{0.0}, o);
  CHECK(e.n_censored == 100);
  CHECK(e.censored_fraction() == 1.0);
  CHECK(e.mean == doctest::Approx(0.2).epsilon(1e-12));  // source only, g dropped

  const std::vector<double> v{1.0, std::nan(""), 3.0};
  const std::vector<ExitKind> k{ExitKind::continuous, ExitKind::poisoned, ExitKind::jump};
  const Estimate sm = summarize(v, k);
  CHECK(sm.mean == 2.0);
  CHECK(sm.n_poisoned == 1);
  CHECK(sm.std_error == doctest::Approx(1.0));
}

TEST_CASE("grid function slots") {
  const GridFunction g(Domain::box({0.0, 0.0}, {1.0, 1.0}), 0.25);
  CHECK(g.size() == 9);
  CHECK(g.slot(std::vector<long>{1, 1}) == 0);
  CHECK(g.slot(std::vector<long>{3, 3}) == 8);
  CHECK(g.slot(std::vector<long>{0, 1}) == -1);
  CHECK(g.slot(std::vector<long>{7, 1}) == -1);
}

TEST_CASE("survival fit recovers an exponential rate") {
  RngStream rng(3, 0);
  std::vector<double> taus(50000);
  for (auto& t : taus) t = rng.exponential() / 2.5;
  const SurvivalFit f = survival_fit(taus, 0.5);
  REQUIRE(f.valid);
  CHECK(f.decay_rate == doctest::Approx(2.5).epsilon(0.05));
  CHECK(f.fit.r2 > 0.99);
}

TEST_CASE("heat kernel reference quantities") {
  // Shell averages of the Brownian density integrate to one.
  for (int d : {1, 2, 3}) {
    double mass = 0.0;
    const double t = 0.1;
    for (int b = 0; b < 400; ++b) {
      const double r0 = 0.01 * b, r1 = 0.01 * (b + 1);
      mass += brownian_shell_density(d, t, r0, r1) * ball_volume(d) * (std::pow(r1, d) - std::pow(r0, d));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }
  CHECK(q_rho(1, 1.0, 1.0, 0.1, 0.0) == doctest::Approx(2.0 / std::sqrt(0.1)));
  CHECK(q_rho(1, 1.0, 1.0, 0.1, 10.0) == doctest::Approx(0.1 / 100.0).epsilon(1e-6));
}

TEST_CASE("Brownian density histogram matches the Gaussian") {
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.a = 0.0;
  std::vector<double> edges;
  for (int i = 0; i <= 20; ++i) edges.push_back(0.05 * i);
  SolveOptions o;
  o.n_paths = 200000;
  const DensityReport rep = empirical_density(s, 0.1, Point{0.0}, edges, o);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (rep.counts[b] < 5000) continue;
    CHECK(rep.density[b] == doctest::Approx(brownian_shell_density(1, 0.1, edges[b], edges[b + 1])).epsilon(0.06));
  }
}

TEST_CASE("small-time displacement shrinks with t") {
  const ProblemSpec s = mixed_disk();
  SolveOptions o;
  o.n_paths = 4000;
  const std::vector<Point> starts{{0.0, 0.0}, {0.5, 0.0}};
  const DisplacementTable a = displacement_probability(s, starts, 0.1, 0.2, 1e-3, o);
  const DisplacementTable b = displacement_probability(s, starts, 0.01, 0.2, 1e-3, o);
  CHECK(a.sup_probability > b.sup_probability + 3.0 * std::hypot(a.sup_std_error, b.sup_std_error));
  CHECK(a.rows.size() == 2);
}

TEST_CASE("occupation of the constant 1 is the exit time") {
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.a = 0.0;
  SolveOptions o;
  o.n_paths = 400;
  o.path.dt = 1e-3;
  const Estimate occ = occupation_estimate(s, constant_field(1.0, 1), Point{0.2}, o);
  s.f = constant_field(1.0, 1);
  s.g = constant_field(0.0, 1);
  const Estimate tau = solve_point(s, Point{0.2}, o);
  CHECK(occ.mean == doctest::Approx(tau.mean).epsilon(1e-12));
}

TEST_CASE("boundary probe points step inward along the normal") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.a = 0.0;
  s.g = parse_expression("x1", 2);
  SolveOptions o;
  o.n_paths = 500;
  o.path.dt = 1e-3;
  const std::vector<double> radii{0.2, 0.05};
  const BoundaryProbe p = boundary_continuity_probe(s, Point{1.0, 0.0}, radii, o);
  CHECK(p.g_at_z == 1.0);
  REQUIRE(p.rows.size() == 2);
  CHECK(p.rows[0].x[0] == doctest::Approx(0.8));
  CHECK(p.rows[1].x[0] == doctest::Approx(0.95));
}
