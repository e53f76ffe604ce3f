#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlfk/sampler.hpp"
#include "nlfk/stats.hpp"

using namespace nlfk;

TEST_CASE("Brownian increments have variance 2 dt per coordinate") {
  RngStream r(11, 0);
  const int n = 200000;
  const double dt = 0.01;
  double s0 = 0.0, s1 = 0.0, s01 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto v = gaussian_increment(r, dt, 2);
    s0 += v[0] * v[0];
    s1 += v[1] * v[1];
    s01 += v[0] * v[1];
  }
  CHECK(s0 / n == doctest::Approx(2.0 * dt).epsilon(0.015));
  CHECK(s1 / n == doctest::Approx(2.0 * dt).epsilon(0.015));
  CHECK(std::fabs(s01 / n) < 5.0 * 2.0 * dt / std::sqrt(n));
}

TEST_CASE("subordinator Laplace transform") {
  const int n = 200000;
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (double dt : {0.1, 1.0}) {
      RngStream r(12, static_cast<std::uint64_t>(alpha * 10 + dt * 100));
      std::vector<double> s(n);
      for (auto& v : s) v = subordinator_increment(r, dt, alpha);
      for (double lambda : {0.5, 1.0, 2.0}) {
        double acc = 0.0, acc2 = 0.0;
        for (double v : s) {
          const double e = std::exp(-lambda * v);
          acc += e;
          acc2 += e * e;
        }
        const double mean = acc / n;
        const double se = std::sqrt((acc2 / n - mean * mean) / n);
        CAPTURE(alpha);
        CAPTURE(dt);
        CAPTURE(lambda);
        CHECK(std::fabs(mean - std::exp(-dt * std::pow(lambda, 0.5 * alpha))) < 5.0 * se + 1e-4);
      }
    }
  }
}

TEST_CASE("alpha = 1 subordinator is the Levy law dt^2 / (2 N^2)") {
  const double dt = 0.3;
  RngStream r(13, 0), q(13, 1);
  std::vector<double> a(50000), b(50000);
  for (auto& v : a) v = subordinator_increment(r, dt, 1.0);
  for (auto& v : b) {
    const double z = q.normal();
    v = dt * dt / (2.0 * z * z);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("stable increment characteristic function") {
  const int n = 200000;
  for (double alpha : {0.7, 1.0, 1.6}) {
    RngStream r(14, static_cast<std::uint64_t>(alpha * 10));
    std::vector<double> y(n);
    for (auto& v : y) v = stable_increment(r, 1.0, alpha, 1.0, 1)[0];
    for (double xi : {0.3, 1.0, 2.0}) {
      double re = 0.0, im = 0.0;
      for (double v : y) {
        re += std::cos(xi * v);
        im += std::sin(xi * v);
      }
      CAPTURE(alpha);
      CAPTURE(xi);
      CHECK(std::fabs(re / n - std::exp(-std::pow(xi, alpha))) < 1e-2);
      CHECK(std::fabs(im / n) < 1e-2);
    }
  }
}

TEST_CASE("amplitude and time scaling") {
  // a Y_dt has characteristic function exp(-dt a^alpha |xi|^alpha).
  const int n = 200000;
  const double alpha = 1.3, a = 0.5, dt = 2.0, xi = 1.5;
  RngStream r(15, 0);
  double re = 0.0;
  for (int i = 0; i < n; ++i) re += std::cos(xi * stable_increment(r, dt, alpha, a, 1)[0]);
  CHECK(std::fabs(re / n - std::exp(-dt * std::pow(a * xi, alpha))) < 1e-2);
}

TEST_CASE("2-d stable increments are isotropic") {
  const int n = 200000;
  RngStream r(16, 0);
  double along = 0.0, diag = 0.0;
  const double c = std::sqrt(0.5);
  for (int i = 0; i < n; ++i) {
    const auto y = stable_increment(r, 1.0, 1.2, 1.0, 2);
    along += std::cos(1.0 * y[0]);
    diag += std::cos(c * y[0] + c * y[1]);
  }
  CHECK(std::fabs(along / n - std::exp(-1.0)) < 1e-2);
  CHECK(std::fabs(diag / n - std::exp(-1.0)) < 1e-2);
}

TEST_CASE("subordinated and direct CMS constructions agree in law") {
  for (double alpha : {0.8, 1.0, 1.5}) {
    RngStream r(17, 0), q(17, 1);
    std::vector<double> a(50000), b(50000);
    for (auto& v : a) v = stable_increment(r, 1.0, alpha, 1.0, 1)[0];
    for (auto& v : b) v = symmetric_stable_cms(q, alpha);
    CAPTURE(alpha);
    CHECK(ks_two_sample(a, b).p_value > 0.01);
  }
}

TEST_CASE("no draws are consumed when a = 0") {
  RngStream r(18, 0);
  std::vector<double> out{1.0, 2.0};
  add_stable_increment(r, 0.1, 1.0, 0.0, out);
  CHECK(r.counter() == 0);
  CHECK(out == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(stable_increment(r, 0.0, 1.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(stable_increment(r, 1.0, 2.0, 1.0, 1), std::invalid_argument);
}
