#include <doctest.h>

#include <cmath>
#include <random>

#include "nlfk/geometry.hpp"

using namespace nlfk;

TEST_CASE("ball membership and signed distance") {
  const Domain d = Domain::ball({0.0, 0.0}, 1.0);
  CHECK(d.contains(Point{0.3, 0.4}));
  CHECK_FALSE(d.contains(Point{0.6, 0.8}));  // on the boundary: open set
  CHECK_FALSE(d.contains(Point{2.0, 0.0}));
  CHECK(d.signed_distance(Point{0.0, 0.0}) == -1.0);
  CHECK(d.signed_distance(Point{3.0, 4.0}) == doctest::Approx(4.0));
  CHECK(d.diameter() == 2.0);
  CHECK(d.inradius() == 1.0);
  const Point n = d.outward_normal(Point{0.0, 1.0});
  CHECK(n[0] == doctest::Approx(0.0));
  CHECK(n[1] == doctest::Approx(1.0));
}

TEST_CASE("box signed distance is exact") {
  const Domain d = Domain::box({0.0, 0.0}, {2.0, 1.0});
  CHECK(d.signed_distance(Point{1.0, 0.5}) == doctest::Approx(-0.5));
  CHECK(d.signed_distance(Point{1.9, 0.5}) == doctest::Approx(-0.1));
  CHECK(d.signed_distance(Point{3.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(d.signed_distance(Point{1.0, -0.25}) == doctest::Approx(0.25));
  CHECK(d.inradius() == doctest::Approx(0.5));
  CHECK(d.diameter() == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(Domain::box({0.0}, {0.0}), GeometryError);
}

TEST_CASE("polytope: triangle facts") {
  const Domain t = Domain::polytope({{{-1.0, 0.0}, 0.0}, {{0.0, -1.0}, 0.0}, {{1.0, 1.0}, 1.0}});
  CHECK(t.vertices().size() == 3);
  CHECK(t.contains(Point{0.2, 0.2}));
  CHECK_FALSE(t.contains(Point{0.6, 0.6}));
  CHECK(t.inradius() == doctest::Approx(1.0 / (2.0 + std::sqrt(2.0))));
  CHECK(t.incenter()[0] == doctest::Approx(1.0 / (2.0 + std::sqrt(2.0))));
  CHECK(t.diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(t.bbox_hi()[0] == doctest::Approx(1.0));
  // Sign is exact and the value is 1-Lipschitz.
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Point a{u(gen), u(gen)};
    const Point b{u(gen), u(gen)};
    CHECK((t.signed_distance(a) < 0.0) == t.contains(a));
    CHECK(std::fabs(t.signed_distance(a) - t.signed_distance(b)) <= std::hypot(a[0] - b[0], a[1] - b[1]) + 1e-12);
  }
}

TEST_CASE("polytope: unbounded or empty sets are rejected") {
  CHECK_THROWS_AS(Domain::polytope({{{-1.0, 0.0}, 0.0}, {{0.0, -1.0}, 0.0}}), GeometryError);
  CHECK_THROWS_AS(Domain::polytope({{{1.0}, 0.0}, {{-1.0}, -1.0}}), GeometryError);
}

TEST_CASE("boundary hit lies within tolerance of the boundary") {
  const Domain d = Domain::ball({0.0, 0.0, 0.0}, 1.0);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Point dir{n(gen), n(gen), n(gen)};
    const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    Point p(3), q(3);
    for (int k = 0; k < 3; ++k) {
      p[k] = 0.5 * dir[k] / len;
      q[k] = 1.7 * dir[k] / len;
    }
    double theta = 0.0;
    const Point z = boundary_hit(d, p, q, 1e-10, theta);
    CHECK(std::fabs(d.signed_distance(z)) <= 1e-10);
    CHECK(theta == doctest::Approx(0.5 / 1.2).epsilon(1e-8));
  }
  CHECK_THROWS_AS(boundary_hit(d, Point{2.0, 0.0, 0.0}, Point{3.0, 0.0, 0.0}, 1e-10), GeometryError);
}

TEST_CASE("lattice is anchored at the bounding-box corner") {
  const Domain d = Domain::box({-1.0, 2.0}, {1.0, 3.0});
  const Lattice lat = domain_lattice(d, 0.25);
  CHECK(lat.anchor == Point{-1.0, 2.0});
  const auto pts = grid_points(d, 0.25);
  // Interior nodes only: 7 x 3.
  CHECK(pts.size() == 21);
  CHECK(pts.front() == Point{-0.75, 2.25});
  const auto idx = grid_indices(d, 0.25);
  REQUIRE(idx.size() == pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(lat.point(idx[i]) == pts[i]);
}

TEST_CASE("disk grid matches a brute-force count") {
  const Domain d = Domain::ball({0.0, 0.0}, 1.0);
  const double h = 0.05;
  long brute = 0;
  for (long i = 0; i <= 40; ++i)
    for (long j = 0; j <= 40; ++j) {
      const double x = -1.0 + i * h, y = -1.0 + j * h;
      if (x * x + y * y < 1.0) ++brute;
    }
  CHECK(static_cast<long>(grid_points(d, h).size()) == brute);
}
