#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlfk/pathsim.hpp"

using namespace nlfk;

namespace {
ProblemSpec mixed_disk() {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.alpha = 1.3;
  s.a = 0.8;
  return s;
}
}  // namespace

TEST_CASE("constant data gives payoff exactly 1 on every path") {
  const ProblemSpec s = mixed_disk();
  PathConfig cfg;
  cfg.dt = 1e-3;
  for (std::uint64_t i = 0; i < 500; ++i) {
    RngStream rng(1, i);
    const ExitRecord rec = simulate_exit(s, Point{0.2, -0.1}, cfg, rng);
    REQUIRE(rec.kind != ExitKind::poisoned);
    REQUIRE(rec.kind != ExitKind::censored);
    CHECK(feynman_kac_payoff(rec, s) == 1.0);
  }
}

TEST_CASE("accumulators integrate constants exactly") {
  ProblemSpec s = mixed_disk();
  s.c = constant_field(-0.7, 2);
  s.f = constant_field(1.0, 2);
  s.g = constant_field(0.0, 2);
  ProblemSpec t = s;
  t.c = constant_field(0.0, 2);
  PathConfig cfg;
  cfg.dt = 2e-3;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream r1(2, i), r2(2, i);
    const ExitRecord a = simulate_exit(s, Point{0.0, 0.0}, cfg, r1);
    const ExitRecord b = simulate_exit(t, Point{0.0, 0.0}, cfg, r2);
    // Same stream, same path: the coefficients do not feed back into X.
    CHECK(a.tau == b.tau);
    CHECK(a.log_weight == doctest::Approx(-0.7 * a.tau).epsilon(1e-12));
    CHECK(b.source_integral == doctest::Approx(b.tau).epsilon(1e-12));
  }
}

TEST_CASE("Feynman-Kac identity holds per path up to the left-point bias") {
  const double lambda = 2.0, dt = 1e-3;
  ProblemSpec s = mixed_disk();
  s.c = constant_field(-lambda, 2);
  s.f = constant_field(lambda, 2);
  PathConfig cfg;
  cfg.dt = dt;
  for (std::uint64_t i = 0; i < 300; ++i) {
    RngStream rng(3, i);
    const double p = feynman_kac_payoff(simulate_exit(s, Point{0.5, 0.0}, cfg, rng), s);
    CHECK(p >= 1.0 - 1e-12);
    CHECK(p <= 1.0 + lambda * dt);
  }
}

TEST_CASE("exit kinds follow the driving process") {
  PathConfig cfg;
  cfg.dt = 1e-3;
  ProblemSpec bm(Domain::ball({0.0, 0.0}, 1.0));
  bm.a = 0.0;
  ProblemSpec jump(Domain::ball({0.0, 0.0}, 1.0));
  jump.sigma = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream r1(4, i), r2(4, i);
    const ExitRecord a = simulate_exit(bm, Point{0.1, 0.1}, cfg, r1);
    CHECK(a.kind == ExitKind::continuous);
    CHECK(std::fabs(bm.domain.signed_distance(a.exit_point)) <= cfg.resolved_hit_tol(bm.domain));
    CHECK(a.tau <= a.steps * cfg.dt + 1e-12);
    CHECK(a.tau > (a.steps - 1) * cfg.dt - 1e-12);
    const ExitRecord b = simulate_exit(jump, Point{0.1, 0.1}, cfg, r2);
    CHECK(b.kind == ExitKind::jump);
    CHECK_FALSE(jump.domain.contains(b.exit_point));
    CHECK(b.tau == doctest::Approx(b.steps * cfg.dt).epsilon(1e-12));
    CHECK(b.sup_displacement >= std::hypot(b.exit_point[0] - 0.1, b.exit_point[1] - 0.1) - 1e-12);
  }
}

TEST_CASE("paths are censored at t_max") {
  ProblemSpec s(Domain::ball({0.0}, 100.0));
  s.f = constant_field(1.0, 1);
  PathConfig cfg;
  cfg.dt = 0.003;
  cfg.t_max = 0.05;
  RngStream rng(5, 0);
  const ExitRecord rec = simulate_exit(s, Point{0.0}, cfg, rng);
  CHECK(rec.kind == ExitKind::censored);
  CHECK(rec.tau == 0.05);
  CHECK(rec.source_integral == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(rec.steps == 17);
  CHECK_THROWS_AS(feynman_kac_payoff(rec, s), std::invalid_argument);
}

TEST_CASE("field evaluation failures poison the path") {
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.f = parse_expression("log(x1 + 0.5)", 1);
  PathConfig cfg;
  cfg.dt = 1e-3;
  int poisoned = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream rng(6, i);
    const ExitRecord rec = simulate_exit(s, Point{0.9}, cfg, rng);
    if (rec.kind == ExitKind::poisoned) {
      ++poisoned;
      CHECK_FALSE(rec.error.empty());
    }
  }
  CHECK(poisoned > 0);
  CHECK(poisoned < 100);
}

TEST_CASE("traces record every step and the exit") {
  ProblemSpec s = mixed_disk();
  PathConfig cfg;
  cfg.dt = 1e-2;
  cfg.record_trace = true;
  RngStream rng(7, 0);
  const ExitRecord rec = simulate_exit(s, Point{0.0, 0.0}, cfg, rng);
  REQUIRE(rec.trace.size() == static_cast<std::size_t>(rec.steps) + 1);
  CHECK(rec.trace.front().event == "start");
  CHECK(rec.trace.back().event.rfind("exit", 0) == 0);
  for (std::size_t i = 1; i < rec.trace.size(); ++i) CHECK(rec.trace[i].t >= rec.trace[i - 1].t);
  std::ostringstream os;
  write_trace_csv(os, rec, 2);
  CHECK(os.str().rfind("t,x1,x2,log_weight,source_integral,event\n", 0) == 0);
}

TEST_CASE("same stream, same record") {
  const ProblemSpec s = mixed_disk();
  PathConfig cfg;
  RngStream a(8, 123), b(8, 123);
  const ExitRecord ra = simulate_exit(s, Point{0.3, 0.3}, cfg, a);
  const ExitRecord rb = simulate_exit(s, Point{0.3, 0.3}, cfg, b);
  CHECK(ra.tau == rb.tau);
  CHECK(ra.exit_point == rb.exit_point);
}

TEST_CASE("free process: exact one-step Brownian law") {
  ProblemSpec s(Domain::ball({0.0}, 1.0));
  s.a = 0.0;
  const int n = 100000;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    RngStream rng(9, static_cast<std::uint64_t>(i));
    const double x = simulate_free(s, Point{0.0}, 0.3, 1.0, rng).x[0];
    m2 += x * x;
  }
  CHECK(m2 / n == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("invalid configurations are rejected") {
  PathConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg.dt = 1.0;
  cfg.t_max = 0.5;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  const ProblemSpec s = mixed_disk();
  RngStream rng(1, 1);
  CHECK_THROWS_AS(simulate_exit(s, Point{2.0, 0.0}, PathConfig{}, rng), std::invalid_argument);
}
