#include "nlfk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlfk/quadrature.hpp"

namespace nlfk {

ProblemSpec::ProblemSpec(Domain dom)
    : dim(dom.dim()),
      domain(std::move(dom)),
      c(constant_field(0.0, dim)),
      f(constant_field(0.0, dim)),
      g(constant_field(1.0, dim)) {
  drift.assign(static_cast<std::size_t>(dim), constant_field(0.0, dim));
}

void ProblemSpec::check() const {
  if (dim < 1) throw SpecError("dim must be >= 1");
  if (domain.dim() != dim) throw SpecError("domain dimension does not match dim");
  if (!(alpha > 0.0 && alpha < 2.0)) throw SpecError("alpha must lie in (0, 2)");
  if (!(a >= 0.0) || !std::isfinite(a)) throw SpecError("a must be >= 0");
  if (sigma != 0 && sigma != 1) throw SpecError("sigma must be 0 or 1");
  if (a == 0.0 && sigma == 0) throw SpecError("a = 0 and sigma = 0 leaves no driving process");
  if (drift.size() != static_cast<std::size_t>(dim)) throw SpecError("drift must have dim components");
  for (const auto* e : {&c, &f, &g})
    if (e->dim() != dim) throw SpecError("coefficient field dimension does not match dim");
  for (const auto& b : drift)
    if (b.dim() != dim) throw SpecError("drift field dimension does not match dim");
  if (!(g_bound >= 0.0) || !std::isfinite(g_bound)) throw SpecError("g_bound must be a finite bound >= 0");
  if (!(kato_warn_threshold > 0.0)) throw SpecError("kato_warn_threshold must be > 0");
  if (norm_p < 0.0) throw SpecError("norm_p must be >= 0");
}

bool ProblemSpec::has_drift() const noexcept {
  for (const auto& b : drift)
    if (!b.is_constant() || b.constant_value() != 0.0) return true;
  return false;
}

void ProblemSpec::drift_at(std::span<const double> x, std::span<double> out) const {
  if (!domain.contains(x)) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = drift[i](x);
}

double frac_constant(int d, double alpha) {
  if (d < 1) throw std::domain_error("frac_constant: d must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("frac_constant: alpha must lie in (0, 2)");
  return alpha * std::pow(2.0, alpha - 1.0) * std::pow(std::numbers::pi, -0.5 * d) *
         std::tgamma(0.5 * (d + alpha)) / std::tgamma(1.0 - 0.5 * alpha);
}

namespace {

// Radial weight rho^{d-1} k_d(rho).
double kato_radial_weight(int d, double rho) {
  if (d == 1) return 1.0;
  if (d == 2) return rho < 1.0 ? -std::log(rho) * rho : 0.0;
  return rho;
}

// Lattice points over the bounding box of D grown by `margin`, keeping those
// within `margin` of D.
std::vector<Point> enlarged_lattice(const Domain& domain, double h, double margin) {
  const std::size_t d = static_cast<std::size_t>(domain.dim());
  std::vector<long> kmin(d), kmax(d);
  for (std::size_t i = 0; i < d; ++i) {
    kmin[i] = static_cast<long>(std::floor(-margin / h));
    kmax[i] = static_cast<long>(std::ceil((domain.bbox_hi()[i] - domain.bbox_lo()[i] + margin) / h));
  }
  std::vector<Point> pts;
  std::vector<long> k = kmin;
  Point x(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = domain.bbox_lo()[i] + static_cast<double>(k[i]) * h;
    if (domain.signed_distance(x) < margin) pts.push_back(x);
    std::size_t axis = d;
    bool done = false;
    while (axis > 0) {
      --axis;
      if (++k[axis] <= kmax[axis]) break;
      k[axis] = kmin[axis];
      if (axis == 0) done = true;
    }
    if (done) break;
  }
  return pts;
}

}  // namespace

KatoProfile kato_profile(const Expr& field, const Domain& domain, std::span<const double> radii,
                         double lattice_h) {
  if (radii.empty()) throw std::invalid_argument("kato_profile: radii must be nonempty");
  if (!(lattice_h > 0.0)) throw std::invalid_argument("kato_profile: lattice_h must be > 0");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("kato_profile: radii must be > 0");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw std::invalid_argument("kato_profile: radii must be strictly decreasing");
  }
  const int d = domain.dim();
  const std::size_t nd = static_cast<std::size_t>(d);
  const double r_max = radii.front();

  KatoProfile prof;
  prof.radii.assign(radii.begin(), radii.end());
  prof.values.assign(radii.size(), 0.0);
  prof.sample_points = enlarged_lattice(domain, lattice_h, r_max);
  if (prof.sample_points.empty()) throw std::invalid_argument("kato_profile: empty lattice");

  // Radial panels between consecutive radii (ascending), split at rho = 1 for
  // the d = 2 kernel kink.
  std::vector<double> edges{0.0};
  for (auto it = radii.rbegin(); it != radii.rend(); ++it) {
    if (d == 2 && edges.back() < 1.0 && *it > 1.0) edges.push_back(1.0);
    edges.push_back(*it);
  }
  struct Node {
    double rho;
    double weight;
  };
  std::vector<std::vector<Node>> panels;  // nodes per panel
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    std::vector<Node> nodes;
    constexpr int kSub = 4;
    const double w = (edges[p + 1] - edges[p]) / kSub;
    for (int s = 0; s < kSub; ++s) {
      const Rule1D gl = gauss_legendre(10, edges[p] + s * w, edges[p] + (s + 1) * w);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q)
        nodes.push_back({gl.nodes[q], gl.weights[q] * kato_radial_weight(d, gl.nodes[q])});
    }
    panels.push_back(std::move(nodes));
  }
  const SphereRule sphere = sphere_rule(d, 4);
  const bool constant = field.is_constant();
  const double const_abs = std::fabs(field.constant_value());

  Point y(nd);
  for (const auto& x : prof.sample_points) {
    double cumulative = 0.0;
    std::size_t radius_idx = radii.size();  // walk radii ascending
    for (std::size_t p = 0; p < panels.size(); ++p) {
      for (const auto& node : panels[p]) {
        double shell = 0.0;
        for (std::size_t s = 0; s < sphere.directions.size(); ++s) {
          for (std::size_t i = 0; i < nd; ++i) y[i] = x[i] + node.rho * sphere.directions[s][i];
          if (!domain.contains(y)) continue;
          shell += sphere.weights[s] * (constant ? const_abs : std::fabs(field(y)));
        }
        cumulative += node.weight * shell;
      }
      if (radius_idx > 0 && edges[p + 1] == radii[radius_idx - 1]) {
        --radius_idx;
        prof.values[radius_idx] = std::max(prof.values[radius_idx], cumulative);
      }
    }
  }
  return prof;
}

double positive_part_norm(const Expr& field, const Domain& domain, double p, double h) {
  if (!(p >= 1.0)) throw std::invalid_argument("positive_part_norm: p must be >= 1");
  // Midpoint rule over bounding-box cells whose centre lies in D.
  const std::size_t d = static_cast<std::size_t>(domain.dim());
  const double cell = std::pow(h, static_cast<double>(d));
  std::vector<long> n(d), k(d, 0);
  for (std::size_t i = 0; i < d; ++i)
    n[i] = std::max(1L, static_cast<long>(std::ceil((domain.bbox_hi()[i] - domain.bbox_lo()[i]) / h)));
  Point x(d);
  double acc = 0.0;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = domain.bbox_lo()[i] + (static_cast<double>(k[i]) + 0.5) * h;
    if (domain.contains(x)) acc += std::pow(std::max(field(x), 0.0), p) * cell;
    std::size_t i = 0;
    while (i < d && ++k[i] == n[i]) k[i++] = 0;
    if (i == d) break;
  }
  return std::pow(acc, 1.0 / p);
}

std::vector<SpecWarning> validate_spec(const ProblemSpec& spec) {
  spec.check();
  std::vector<SpecWarning> warnings;
  const int d = spec.dim;
  const Domain& dom = spec.domain;
  const int per_axis = std::max(8, static_cast<int>(std::pow(2.0e4, 1.0 / d)));
  const double h = dom.diameter() / per_axis;
  const double p = spec.norm_p > 0.0 ? std::max(spec.norm_p, 1.0) : static_cast<double>(d);

  try {
    const double norm = positive_part_norm(spec.c, dom, p, h);
    if (norm > spec.kato_warn_threshold) {
      std::ostringstream msg;
      msg << "estimated ||c+||_{L^" << p << "(D)} = " << norm << " exceeds kato_warn_threshold "
          << spec.kato_warn_threshold << "; the representation may fail for large positive c";
      warnings.push_back({"c_norm", msg.str(), norm});
    }
  } catch (const EvalError& e) {
    warnings.push_back({"probe_eval", std::string("c failed on the probe lattice: ") + e.what(), 0.0});
  }

  // Exterior probes: a shell of lattice points around D.
  const double margin = 0.5 * dom.diameter();
  const std::size_t nd = static_cast<std::size_t>(d);
  std::vector<long> kmax(nd);
  const double he = (dom.diameter() + 2.0 * margin) / per_axis;
  for (std::size_t i = 0; i < nd; ++i)
    kmax[i] = static_cast<long>(std::ceil((dom.bbox_hi()[i] - dom.bbox_lo()[i] + 2.0 * margin) / he));
  double worst_g = 0.0;
  double worst_b = 0.0;
  bool g_failed = false;
  std::vector<long> k(nd, 0);
  Point x(nd);
  bool done = false;
  while (!done) {
    for (std::size_t i = 0; i < nd; ++i) x[i] = dom.bbox_lo()[i] - margin + static_cast<double>(k[i]) * he;
    if (!dom.contains(x)) {
      try {
        worst_g = std::max(worst_g, std::fabs(spec.g(x)));
      } catch (const EvalError&) {
        g_failed = true;
      }
      for (const auto& b : spec.drift) {
        try {
          worst_b = std::max(worst_b, std::fabs(b(x)));
        } catch (const EvalError&) {
        }
      }
    }
    std::size_t axis = nd;
    while (axis > 0) {
      --axis;
      if (++k[axis] <= kmax[axis]) break;
      k[axis] = 0;
      if (axis == 0) done = true;
    }
  }
  if (worst_g > spec.g_bound) {
    std::ostringstream msg;
    msg << "|g| reaches " << worst_g << " on the exterior probe lattice, above the declared bound "
        << spec.g_bound;
    warnings.push_back({"g_bound", msg.str(), worst_g});
  }
  if (g_failed) warnings.push_back({"probe_eval", "g failed to evaluate at some exterior probe points", 0.0});
  if (worst_b > 0.0) {
    std::ostringstream msg;
    msg << "drift is nonzero outside D (max |b_i| = " << worst_b << "); it is clamped to 0 on D^c";
    warnings.push_back({"drift_clamped", msg.str(), worst_b});
  }
  return warnings;
}

}  // namespace nlfk
