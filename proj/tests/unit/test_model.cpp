#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>

#include "nlfk/model.hpp"

using namespace nlfk;
using boost::multiprecision::cpp_bin_float_50;

namespace {
cpp_bin_float_50 reference_constant(int d, double alpha) {
  const cpp_bin_float_50 a(alpha);
  const cpp_bin_float_50 pi = boost::math::constants::pi<cpp_bin_float_50>();
  return a * pow(cpp_bin_float_50(2), a - 1) * pow(pi, -cpp_bin_float_50(d) / 2) * tgamma((d + a) / 2) /
         tgamma(1 - a / 2);
}
}  // namespace

TEST_CASE("fractional constant against a 50-digit reference") {
  for (int d : {1, 2, 3})
    for (double alpha : {0.3, 0.5, 1.0, 1.5, 1.9}) {
      const double ref = static_cast<double>(reference_constant(d, alpha));
      CAPTURE(d);
      CAPTURE(alpha);
      CHECK(std::fabs(frac_constant(d, alpha) - ref) <= 1e-12 * std::fabs(ref));
    }
  CHECK(frac_constant(1, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(frac_constant(3, 1.0) == doctest::Approx(1.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(frac_constant(1, 0.0), std::domain_error);
  CHECK_THROWS_AS(frac_constant(1, 2.0), std::domain_error);
}

TEST_CASE("problem spec invariants") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  CHECK(s.dim == 2);
  CHECK_NOTHROW(s.check());
  CHECK_FALSE(s.has_drift());
  s.alpha = 2.0;
  CHECK_THROWS_AS(s.check(), SpecError);
  s.alpha = 1.0;
  s.a = 0.0;
  s.sigma = 0;
  CHECK_THROWS_AS(s.check(), SpecError);
  s.sigma = 2;
  s.a = 1.0;
  CHECK_THROWS_AS(s.check(), SpecError);
  s.sigma = 1;
  s.drift = {parse_expression("x2", 2), parse_expression("1", 2)};
  CHECK(s.has_drift());
  std::vector<double> b(2);
  s.drift_at(Point{0.5, 0.25}, b);
  CHECK(b == std::vector<double>{0.25, 1.0});
  s.drift_at(Point{2.0, 0.25}, b);
  CHECK(b == std::vector<double>{0.0, 0.0});
  s.f = parse_expression("x1", 1);
  CHECK_THROWS_AS(s.check(), SpecError);
}

TEST_CASE("Kato profile of the indicator in three dimensions is 2 pi r^2") {
  const Domain dom = Domain::ball({0.0, 0.0, 0.0}, 1.0);
  const std::vector<double> radii{0.3, 0.2, 0.1};
  const KatoProfile p = kato_profile(constant_field(1.0, 3), dom, radii, 0.25);
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(p.values[i] == doctest::Approx(2.0 * std::numbers::pi * radii[i] * radii[i]).epsilon(1e-6));
}

TEST_CASE("Kato profile closed forms in one and two dimensions") {
  const std::vector<double> radii{0.5, 0.25};
  const KatoProfile p1 = kato_profile(constant_field(2.0, 1), Domain::ball({0.0}, 1.0), radii, 0.1);
  CHECK(p1.values[0] == doctest::Approx(2.0 * 2.0 * 0.5).epsilon(1e-6));
  CHECK(p1.values[1] == doctest::Approx(2.0 * 2.0 * 0.25).epsilon(1e-6));
  const KatoProfile p2 = kato_profile(constant_field(1.0, 2), Domain::ball({0.0, 0.0}, 1.0), radii, 0.1);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    CHECK(p2.values[i] == doctest::Approx(std::numbers::pi * r * r * (0.5 - std::log(r))).epsilon(1e-4));
  }
}

TEST_CASE("Kato profile is nonnegative and nondecreasing in r") {
  const Domain dom = Domain::box({-1.0, -1.0}, {1.0, 1.0});
  const std::vector<double> radii{0.8, 0.4, 0.2, 0.1, 0.05};
  const KatoProfile p = kato_profile(parse_expression("sin(3 * x1) * x2 - 0.2", 2), dom, radii, 0.1);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(p.values[i] >= 0.0);
    if (i > 0) CHECK(p.values[i] <= p.values[i - 1]);
  }
  CHECK_THROWS_AS(kato_profile(constant_field(1.0, 2), dom, std::vector<double>{0.1, 0.2}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("positive part norm") {
  const Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0});
  // c = x1 - 0.5: ||c+||_2 = sqrt(int_0.5^1 (x - 0.5)^2) = sqrt(1/24).
  CHECK(positive_part_norm(parse_expression("x1 - 0.5", 2), dom, 2.0, 0.01) ==
        doctest::Approx(std::sqrt(1.0 / 24.0)).epsilon(1e-3));
  CHECK(positive_part_norm(constant_field(-1.0, 2), dom, 2.0, 0.1) == 0.0);
}

TEST_CASE("spec warnings") {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  CHECK(validate_spec(s).empty());
  s.c = constant_field(5.0, 2);
  s.g = parse_expression("x1", 2);
  s.g_bound = 0.5;
  s.drift = {parse_expression("1", 2), constant_field(0.0, 2)};
  const auto w = validate_spec(s);
  auto has = [&](const std::string& code) {
    for (const auto& x : w)
      if (x.code == code) return true;
    return false;
  };
  CHECK(has("c_norm"));
  CHECK(has("g_bound"));
  CHECK(has("drift_clamped"));
}
