#include "nlfk/sampler.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlfk {

void gaussian_increment(RngStream& rng, double dt, std::span<double> out) {
  const double scale = std::sqrt(2.0 * dt);
  for (double& v : out) v = scale * rng.normal();
}

std::vector<double> gaussian_increment(RngStream& rng, double dt, int d) {
  if (!(dt > 0.0)) throw std::invalid_argument("gaussian_increment: dt must be > 0");
  std::vector<double> out(static_cast<std::size_t>(d));
  gaussian_increment(rng, dt, out);
  return out;
}

double subordinator_increment(RngStream& rng, double dt, double alpha) {
  const double beta = 0.5 * alpha;
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  // S1 = sin(beta U) / sin(U)^(1/beta) * (sin((1-beta) U) / E)^((1-beta)/beta)
  if (alpha == 1.0) {
    // beta = 1/2: both exponents are integers
    const double su = std::sin(u);
    const double sh = std::sin(0.5 * u);
    return dt * dt * sh * sh / (su * su * e);
  }
  const double s1 = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta) *
                    std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
  return std::pow(dt, 1.0 / beta) * s1;
}

void add_stable_increment(RngStream& rng, double dt, double alpha, double a, std::span<double> out) {
  if (a == 0.0) return;
  const double s = subordinator_increment(rng, dt, alpha);
  const double scale = a * std::sqrt(2.0 * s);
  for (double& v : out) v += scale * rng.normal();
}

std::vector<double> stable_increment(RngStream& rng, double dt, double alpha, double a, int d) {
  if (!(dt > 0.0)) throw std::invalid_argument("stable_increment: dt must be > 0");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable_increment: alpha must be in (0,2)");
  if (!(a >= 0.0)) throw std::invalid_argument("stable_increment: a must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  add_stable_increment(rng, dt, alpha, a, out);
  return out;
}

double symmetric_stable_cms(RngStream& rng, double alpha) {
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (alpha == 1.0) return std::tan(v);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

}  // namespace nlfk
