#include "nlfk/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlfk {

namespace {

template <unsigned N>
Rule1D expand_rule(double a, double b) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  Rule1D out;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      out.nodes.push_back(mid);
      out.weights.push_back(half * w[i]);
      continue;
    }
    out.nodes.push_back(mid - half * x[i]);
    out.weights.push_back(half * w[i]);
    out.nodes.push_back(mid + half * x[i]);
    out.weights.push_back(half * w[i]);
  }
  return out;
}

}  // namespace

Rule1D gauss_legendre(int n, double a, double b) {
  switch (n) {
    case 5: return expand_rule<5>(a, b);
    case 10: return expand_rule<10>(a, b);
    case 20: return expand_rule<20>(a, b);
    case 30: return expand_rule<30>(a, b);
    default: throw std::invalid_argument("gauss_legendre: unsupported order " + std::to_string(n));
  }
}

SphereRule sphere_rule(int d, int order) {
  if (order < 1) throw std::invalid_argument("sphere_rule: order must be >= 1");
  SphereRule rule;
  rule.dim = d;
  switch (d) {
    case 1:
      rule.directions = {{1.0}, {-1.0}};
      rule.weights = {1.0, 1.0};
      break;
    case 2: {
      const int m = 4 * order;
      for (int k = 0; k < m; ++k) {
        const double phi = 2.0 * std::numbers::pi * (k + 0.5) / m;
        rule.directions.push_back({std::cos(phi), std::sin(phi)});
        rule.weights.push_back(2.0 * std::numbers::pi / m);
      }
      break;
    }
    case 3: {
      const int n = order <= 5 ? 5 : order <= 10 ? 10 : 20;
      const Rule1D gl = gauss_legendre(n, -1.0, 1.0);
      const int m = 2 * n;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double ct = gl.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int k = 0; k < m; ++k) {
          const double phi = 2.0 * std::numbers::pi * (k + 0.5) / m;
          rule.directions.push_back({st * std::cos(phi), st * std::sin(phi), ct});
          rule.weights.push_back(gl.weights[i] * 2.0 * std::numbers::pi / m);
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("sphere_rule: only d = 1, 2, 3 are supported, got " + std::to_string(d));
  }
  return rule;
}

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double ball_volume(int d) { return sphere_area(d) / d; }

}  // namespace nlfk
