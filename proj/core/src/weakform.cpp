#include "nlfk/weakform.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nlfk/quadrature.hpp"

namespace nlfk {

// ---------------------------------------------------------------------------
// Test functions

TestFunction::TestFunction(const Domain& domain, Point center, double width)
    : center_(std::move(center)), width_(width) {
  const std::size_t d = static_cast<std::size_t>(domain.dim());
  if (center_.size() != d) throw std::invalid_argument("bump center has wrong dimension");
  if (!(width_ > 0.0)) throw std::invalid_argument("bump width must be > 0");
  Point corner(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (std::size_t i = 0; i < d; ++i) corner[i] = center_[i] + ((mask >> i) & 1U ? width_ : -width_);
    if (!(domain.signed_distance(corner) < 0.0))
      throw std::invalid_argument("bump support cube is not strictly inside D");
  }
}

double TestFunction::operator()(std::span<const double> x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < center_.size(); ++i) {
    const double s = (x[i] - center_[i]) / width_;
    if (!(std::fabs(s) < 1.0)) return 0.0;
    v *= std::exp(-1.0 / (1.0 - s * s));
  }
  return v;
}

void TestFunction::gradient(std::span<const double> x, std::span<double> out) const {
  const double phi = (*this)(x);
  for (std::size_t i = 0; i < center_.size(); ++i) {
    if (phi == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double s = (x[i] - center_[i]) / width_;
    const double one = 1.0 - s * s;
    out[i] = phi * (-2.0 * s / (one * one)) / width_;
  }
}

std::vector<TestFunction> default_bumps(const Domain& domain) {
  const int d = domain.dim();
  const double r = domain.inradius();
  const double width = std::min(r / 3.0, 0.98 * r / (2.0 * std::sqrt(static_cast<double>(d))));
  const Point& c = domain.incenter();
  std::vector<TestFunction> bumps;
  bumps.emplace_back(domain, c, width);
  std::vector<Point> shifts;
  if (d == 1) {
    shifts = {{0.5 * r}, {-0.5 * r}, {0.25 * r}, {-0.25 * r}};
  } else {
    for (int axis = 0; axis < 2; ++axis)
      for (double sign : {1.0, -1.0}) {
        Point s(static_cast<std::size_t>(d), 0.0);
        s[static_cast<std::size_t>(axis)] = sign * 0.5 * r;
        shifts.push_back(s);
      }
  }
  for (const auto& s : shifts) {
    Point center = c;
    for (std::size_t i = 0; i < center.size(); ++i) center[i] += s[i];
    bumps.emplace_back(domain, center, width);
  }
  return bumps;
}

void QuadraturePolicy::check() const {
  if (!(h > 0.0)) throw std::invalid_argument("quadrature h must be > 0");
  if (!(delta >= 2.0 * h * (1.0 - 1e-12))) throw std::invalid_argument("quadrature policy requires delta >= 2 h");
  if (far_radius > 0.0 && !(delta < far_radius)) throw std::invalid_argument("quadrature policy requires delta < R");
  if (tail_nodes != 5 && tail_nodes != 10 && tail_nodes != 20 && tail_nodes != 30)
    throw std::invalid_argument("tail_nodes must be one of 5, 10, 20, 30");
  if (sphere_order < 1) throw std::invalid_argument("sphere_order must be >= 1");
}

// ---------------------------------------------------------------------------
// Closed forms

double kernel_tail_mass(int d, double alpha, double R) { return sphere_area(d) * std::pow(R, -alpha) / alpha; }

double unit_cell_singular_integral(int d, double alpha) {
  const double p = 2.0 - alpha;
  switch (d) {
    case 1: return 2.0 * std::pow(0.5, p) / p;
    case 2: {
      // 8 symmetric triangles: int_0^{pi/4} (1/(2 cos t))^p / p dt
      double acc = 0.0;
      const Rule1D gl = gauss_legendre(30, 0.0, 0.25 * std::numbers::pi);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        acc += gl.weights[i] * std::pow(0.5 / std::cos(gl.nodes[i]), p) / p;
      return 8.0 * acc;
    }
    case 3: {
      const SphereRule s = sphere_rule(3, 20);
      double acc = 0.0;
      for (std::size_t i = 0; i < s.directions.size(); ++i) {
        double m = 0.0;
        for (double c : s.directions[i]) m = std::max(m, std::fabs(c));
        acc += s.weights[i] * std::pow(0.5 / m, p) / p;
      }
      return acc;
    }
    default: throw std::invalid_argument("unit_cell_singular_integral: d must be 1, 2 or 3");
  }
}

namespace {

double max_distance_from(const Domain& dom, std::span<const double> p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        auto dist = [&](std::span<const double> q) {
          double acc = 0.0;
          for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - q[i]) * (p[i] - q[i]);
          return std::sqrt(acc);
        };
        if constexpr (std::is_same_v<T, Ball>) {
          return dist(s.center) + s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          double acc = 0.0;
          for (std::size_t i = 0; i < p.size(); ++i) {
            const double m = std::max(std::fabs(p[i] - s.lo[i]), std::fabs(p[i] - s.hi[i]));
            acc += m * m;
          }
          return std::sqrt(acc);
        } else {
          double best = 0.0;
          for (const auto& v : dom.vertices()) best = std::max(best, dist(v));
          return best;
        }
      },
      dom.shape());
}

}  // namespace

// ---------------------------------------------------------------------------
// Assembly

double WeakFormFunctional::Term::eval(std::span<const double> u) const {
  double acc = constant;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += coef[i] * u[i];
  return acc;
}

namespace {

// Dense description of the interaction box around the bump support.
struct InteractionBox {
  int d = 0;
  double h = 0.0;
  Point anchor;
  std::vector<long> lo;      // lattice index of the first cell per axis
  std::vector<long> extent;  // cells per axis
  std::size_t cells = 0;
  std::vector<long> node_id;  // interior node id or -1
  std::vector<double> phi;
  std::vector<double> g;      // g at exterior cells (NaN inside)
  std::vector<Point> nodes;
  std::vector<std::vector<long>> node_index;
  std::vector<std::vector<long>> offsets;  // nonzero lattice offsets with |o| h <= R
  std::vector<double> offset_dist;
  std::vector<std::size_t> support;  // cells with phi != 0
  double far_radius = 0.0;

  std::vector<long> index_of(std::size_t cell) const {
    std::vector<long> k(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
      const auto e = static_cast<std::size_t>(extent[static_cast<std::size_t>(i)]);
      k[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + static_cast<long>(cell % e);
      cell /= e;
    }
    return k;
  }

  // Cell of index k + o, or npos when outside the box.
  std::size_t shifted(std::span<const long> k, std::span<const long> o) const {
    std::size_t lin = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const long v = k[i] + o[i] - lo[i];
      if (v < 0 || v >= extent[i]) return npos;
      lin = lin * static_cast<std::size_t>(extent[i]) + static_cast<std::size_t>(v);
    }
    return lin;
  }

  Point point(std::span<const long> k) const {
    Point x(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) x[i] = anchor[i] + static_cast<double>(k[i]) * h;
    return x;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

InteractionBox build_box(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy) {
  policy.check();
  InteractionBox box;
  box.d = spec.dim;
  box.h = policy.h;
  box.anchor = spec.domain.bbox_lo();
  const std::size_t d = static_cast<std::size_t>(box.d);
  const double h = policy.h;

  // Far radius: every y with |x - y| > R must lie in D^c for x in the support.
  Point corner(d);
  double needed = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (std::size_t i = 0; i < d; ++i)
      corner[i] = phi.center()[i] + ((mask >> i) & 1U ? phi.width() : -phi.width());
    needed = std::max(needed, max_distance_from(spec.domain, corner));
  }
  box.far_radius = std::max({policy.far_radius, needed, 1.5 * policy.delta});
  const long m = static_cast<long>(std::floor(box.far_radius / h));

  std::vector<long> s_lo(d), s_hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    s_lo[i] = static_cast<long>(std::ceil((phi.center()[i] - phi.width() - box.anchor[i]) / h)) - 1;
    s_hi[i] = static_cast<long>(std::floor((phi.center()[i] + phi.width() - box.anchor[i]) / h)) + 1;
  }
  box.lo.resize(d);
  box.extent.resize(d);
  box.cells = 1;
  for (std::size_t i = 0; i < d; ++i) {
    box.lo[i] = s_lo[i] - m;
    box.extent[i] = s_hi[i] + m - box.lo[i] + 1;
    box.cells *= static_cast<std::size_t>(box.extent[i]);
  }
  box.node_id.assign(box.cells, -1);
  box.phi.assign(box.cells, 0.0);
  box.g.assign(box.cells, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t cell = 0; cell < box.cells; ++cell) {
    const auto k = box.index_of(cell);
    const Point x = box.point(k);
    if (spec.domain.contains(x)) {
      box.node_id[cell] = static_cast<long>(box.nodes.size());
      box.nodes.push_back(x);
      box.node_index.push_back(k);
      box.phi[cell] = phi(x);
      if (box.phi[cell] != 0.0) box.support.push_back(cell);
    }
  }

  // Exterior g values are needed only within R of the support.
  std::vector<long> o(d);
  std::vector<long> ok(d);
  for (long lin = 0; lin < static_cast<long>(std::pow(2 * m + 1, static_cast<double>(d))); ++lin) {
    long rem = lin;
    double r2 = 0.0;
    bool zero = true;
    for (std::size_t i = 0; i < d; ++i) {
      o[d - 1 - i] = rem % (2 * m + 1) - m;
      rem /= (2 * m + 1);
    }
    for (std::size_t i = 0; i < d; ++i) {
      r2 += static_cast<double>(o[i] * o[i]);
      zero = zero && o[i] == 0;
    }
    const double dist = std::sqrt(r2) * h;
    if (zero || dist > box.far_radius) continue;
    box.offsets.push_back(o);
    box.offset_dist.push_back(dist);
  }
  for (std::size_t cell : box.support) {
    const auto k = box.index_of(cell);
    for (const auto& off : box.offsets) {
      const std::size_t q = box.shifted(k, off);
      if (box.node_id[q] >= 0 || !std::isnan(box.g[q])) continue;
      box.g[q] = spec.g(box.point(box.index_of(q)));
    }
  }
  return box;
}

}  // namespace

WeakFormFunctional::WeakFormFunctional(const ProblemSpec& spec, const TestFunction& phi,
                                       const QuadraturePolicy& policy)
    : policy_(policy), h_(policy.h) {
  const InteractionBox box = build_box(spec, phi, policy);
  nodes_ = box.nodes;
  node_index_ = box.node_index;
  far_radius_ = box.far_radius;
  const std::size_t d = static_cast<std::size_t>(spec.dim);
  const std::size_t n = nodes_.size();
  for (Term* t : {&gradient_, &near_, &mid_, &far_, &drift_, &potential_, &source_}) t->coef.assign(n, 0.0);

  const double h = h_;
  const double cell = std::pow(h, static_cast<double>(d));
  const double kappa = spec.a > 0.0 ? std::pow(spec.a, spec.alpha) * frac_constant(spec.dim, spec.alpha) / 2.0 : 0.0;
  const double self_cell = std::pow(h, 2.0 - spec.alpha) * unit_cell_singular_integral(spec.dim, spec.alpha);
  const double tail_mass = kernel_tail_mass(spec.dim, spec.alpha, far_radius_);
  const bool drift = spec.has_drift();

  // grad_h u(p) . v * scale, central where both neighbours are interior.
  std::vector<long> unit(d, 0);
  auto add_grad = [&](Term& term, std::size_t p_cell, std::span<const long> kp, std::span<const double> v,
                      double scale) {
    const long p = box.node_id[p_cell];
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i] == 0.0) continue;
      std::fill(unit.begin(), unit.end(), 0);
      unit[i] = 1;
      const std::size_t plus_cell = box.shifted(kp, unit);
      unit[i] = -1;
      const std::size_t minus_cell = box.shifted(kp, unit);
      const long plus = plus_cell == InteractionBox::npos ? -1 : box.node_id[plus_cell];
      const long minus = minus_cell == InteractionBox::npos ? -1 : box.node_id[minus_cell];
      const double w = scale * v[i];
      if (plus >= 0 && minus >= 0) {
        term.coef[static_cast<std::size_t>(plus)] += w / (2.0 * h);
        term.coef[static_cast<std::size_t>(minus)] -= w / (2.0 * h);
      } else if (plus >= 0) {
        term.coef[static_cast<std::size_t>(plus)] += w / h;
        term.coef[static_cast<std::size_t>(p)] -= w / h;
      } else if (minus >= 0) {
        term.coef[static_cast<std::size_t>(p)] += w / h;
        term.coef[static_cast<std::size_t>(minus)] -= w / h;
      }
    }
  };

  // Far-field g integral, t = (R/rho)^alpha.
  const Rule1D tnodes = gauss_legendre(policy.tail_nodes, 0.0, 1.0);
  const SphereRule sphere = sphere_rule(spec.dim, policy.sphere_order);
  Point grad(d), bvec(d), y(d);

  for (std::size_t p_cell : box.support) {
    const auto kp = box.index_of(p_cell);
    const auto p = static_cast<std::size_t>(box.node_id[p_cell]);
    const Point& x = nodes_[p];
    const double phip = box.phi[p_cell];
    phi.gradient(x, grad);
    phi_l1_ += cell * phip;
    double gnorm = 0.0;
    for (double gi : grad) gnorm += gi * gi;
    grad_phi_l1_ += cell * std::sqrt(gnorm);

    if (spec.sigma == 1) add_grad(gradient_, p_cell, kp, grad, cell);
    if (drift) {
      for (std::size_t i = 0; i < d; ++i) bvec[i] = spec.drift[i](x);
      add_grad(drift_, p_cell, kp, bvec, cell * phip);
    }
    potential_.coef[p] += cell * spec.c(x) * phip;
    source_.constant += cell * spec.f(x) * phip;
    if (kappa == 0.0) continue;

    add_grad(near_, p_cell, kp, grad, kappa * cell * self_cell / static_cast<double>(d));

    double tail = 0.0;
    for (std::size_t t = 0; t < tnodes.nodes.size(); ++t) {
      const double rho = far_radius_ * std::pow(tnodes.nodes[t], -1.0 / spec.alpha);
      double shell = 0.0;
      for (std::size_t s = 0; s < sphere.directions.size(); ++s) {
        for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + rho * sphere.directions[s][i];
        shell += sphere.weights[s] * spec.g(y);
      }
      tail += tnodes.weights[t] * shell;
    }
    tail *= std::pow(far_radius_, -spec.alpha) / spec.alpha;
    far_.coef[p] += 2.0 * kappa * cell * phip * tail_mass;
    far_.constant -= 2.0 * kappa * cell * phip * tail;

    for (std::size_t oi = 0; oi < box.offsets.size(); ++oi) {
      const std::size_t q_cell = box.shifted(kp, box.offsets[oi]);
      const double dist = box.offset_dist[oi];
      const double kernel = std::pow(dist, -(static_cast<double>(d) + spec.alpha));
      const double phiq = box.phi[q_cell];
      const double mult = phiq != 0.0 ? 1.0 : 2.0;
      const double w = mult * kappa * cell * cell * (phip - phiq) * kernel;
      Term& term = dist < policy.delta ? near_ : mid_;
      term.coef[p] += w;
      const long q = box.node_id[q_cell];
      if (q >= 0)
        term.coef[static_cast<std::size_t>(q)] -= w;
      else
        term.constant -= w * box.g[q_cell];
    }
  }
}

WeakFormTerms WeakFormFunctional::apply(std::span<const double> u) const {
  if (u.size() != nodes_.size()) throw std::invalid_argument("weak form: node value count mismatch");
  WeakFormTerms t;
  t.gradient = gradient_.eval(u);
  t.fractional_near = near_.eval(u);
  t.fractional_mid = mid_.eval(u);
  t.fractional_far = far_.eval(u);
  t.drift = drift_.eval(u);
  t.potential = potential_.eval(u);
  t.source = source_.eval(u);
  return t;
}

std::vector<double> WeakFormFunctional::residual_coefficients() const {
  std::vector<double> w(nodes_.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = gradient_.coef[i] + near_.coef[i] + mid_.coef[i] + far_.coef[i] - drift_.coef[i] - potential_.coef[i];
  return w;
}

std::vector<double> WeakFormFunctional::sample(const Expr& u) const {
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(nodes_[i]);
  return v;
}

std::vector<double> WeakFormFunctional::sample(const std::function<double(std::span<const double>)>& u) const {
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(nodes_[i]);
  return v;
}

namespace {
void check_grid_lattice(const GridFunction& u, double h, const Point& anchor) {
  if (std::fabs(u.h() - h) > 1e-12 * h) throw std::invalid_argument("grid spacing does not match the quadrature lattice");
  for (std::size_t i = 0; i < anchor.size(); ++i)
    if (u.lattice().anchor[i] != anchor[i]) throw std::invalid_argument("grid anchor does not match the domain lattice");
}
}  // namespace

std::vector<double> WeakFormFunctional::sample(const GridFunction& u) const {
  check_grid_lattice(u, h_, u.domain().bbox_lo());
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const long s = u.slot(node_index_[i]);
    if (s < 0) throw std::invalid_argument("grid function is undefined at an interior lattice node");
    v[i] = u.values()[static_cast<std::size_t>(s)];
    if (!std::isfinite(v[i])) throw std::invalid_argument("grid function has a non-finite value");
  }
  return v;
}

std::vector<double> WeakFormFunctional::sample_std_errors(const GridFunction& u) const {
  std::vector<double> v(nodes_.size(), 0.0);
  if (u.std_errors().empty()) return v;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const long s = u.slot(node_index_[i]);
    if (s >= 0) v[i] = u.std_errors()[static_cast<std::size_t>(s)];
  }
  return v;
}

double fractional_double_sum(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             std::span<const double> u_nodes, bool swap_roles) {
  const InteractionBox box = build_box(spec, phi, policy);
  if (u_nodes.size() != box.nodes.size()) throw std::invalid_argument("fractional_double_sum: node count mismatch");
  const std::size_t d = static_cast<std::size_t>(spec.dim);
  const double cell = std::pow(policy.h, static_cast<double>(d));
  const double kappa = spec.a > 0.0 ? std::pow(spec.a, spec.alpha) * frac_constant(spec.dim, spec.alpha) / 2.0 : 0.0;
  auto u_at = [&](std::size_t c) {
    const long id = box.node_id[c];
    return id >= 0 ? u_nodes[static_cast<std::size_t>(id)] : box.g[c];
  };
  double sum = 0.0;
  for (std::size_t xc = 0; xc < box.cells; ++xc) {
    const auto kx = box.index_of(xc);
    for (std::size_t oi = 0; oi < box.offsets.size(); ++oi) {
      const std::size_t yc = box.shifted(kx, box.offsets[oi]);
      if (yc == InteractionBox::npos) continue;
      if (box.phi[xc] == 0.0 && box.phi[yc] == 0.0) continue;
      const double kernel = std::pow(box.offset_dist[oi], -(static_cast<double>(d) + spec.alpha));
      const std::size_t a = swap_roles ? yc : xc;
      const std::size_t b = swap_roles ? xc : yc;
      sum += (u_at(a) - u_at(b)) * (box.phi[a] - box.phi[b]) * kernel;
    }
  }
  return kappa * cell * cell * sum;
}

// ---------------------------------------------------------------------------

WeakFormTerms bilinear_terms(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             const Expr& u) {
  const WeakFormFunctional wf(spec, phi, policy);
  return wf.apply(wf.sample(u));
}

WeakFormTerms bilinear_terms(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                             const GridFunction& u) {
  const WeakFormFunctional wf(spec, phi, policy);
  return wf.apply(wf.sample(u));
}

double bilinear_E0(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy, const Expr& u) {
  return bilinear_terms(spec, phi, policy, u).e0();
}

double bilinear_E0(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                   const GridFunction& u) {
  return bilinear_terms(spec, phi, policy, u).e0();
}

double residual(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy, const Expr& u) {
  return bilinear_terms(spec, phi, policy, u).residual();
}

double residual(const ProblemSpec& spec, const TestFunction& phi, const QuadraturePolicy& policy,
                const GridFunction& u) {
  return bilinear_terms(spec, phi, policy, u).residual();
}

double fractional_laplacian_at(const std::function<double(std::span<const double>)>& u, std::span<const double> x,
                               double alpha, std::span<const double> radial_breaks, int sphere_order) {
  const int d = static_cast<int>(x.size());
  const std::size_t nd = x.size();
  const SphereRule sphere = sphere_rule(d, sphere_order);
  const double u0 = u(x);
  Point plus(nd), minus(nd);
  // sum_s w_s (u(x + rho theta) + u(x - rho theta) - 2 u(x))
  auto second_difference = [&](double rho) {
    double acc = 0.0;
    for (std::size_t s = 0; s < sphere.directions.size(); ++s) {
      for (std::size_t i = 0; i < nd; ++i) {
        plus[i] = x[i] + rho * sphere.directions[s][i];
        minus[i] = x[i] - rho * sphere.directions[s][i];
      }
      acc += sphere.weights[s] * (u(plus) + u(minus) - 2.0 * u0);
    }
    return acc;
  };

  std::vector<double> breaks(radial_breaks.begin(), radial_breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [](double b) { return !(b > 0.0); }), breaks.end());
  if (breaks.empty()) breaks.push_back(1.0);
  // Inside eps the second difference is quadratic in rho to O(eps^2); the
  // direct integrand would lose everything to cancellation there.
  const double eps = 1e-3 * breaks.front();
  double total = second_difference(eps) / (eps * eps) * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);

  boost::math::quadrature::tanh_sinh<double> integrator;
  double a = eps;
  for (double b : breaks) {
    total += integrator.integrate([&](double rho) { return second_difference(rho) * std::pow(rho, -1.0 - alpha); },
                                  a, b);
    a = b;
  }
  const double big = breaks.back();
  total += std::pow(big, -alpha) / alpha *
           integrator.integrate([&](double t) { return second_difference(big * std::pow(t, -1.0 / alpha)); }, 0.0, 1.0);
  return 0.5 * frac_constant(d, alpha) * total;
}

// ---------------------------------------------------------------------------

namespace {

template <typename U>
VerifyReport verify_impl(const U& u, const ProblemSpec& spec, std::span<const TestFunction> bumps,
                         const QuadraturePolicy& policy, double tol_c, double dt) {
  if (bumps.empty()) throw std::invalid_argument("verify_solution: bump set is empty");
  VerifyReport rep;
  rep.h = policy.h;
  rep.dt = dt;
  rep.tol_c = tol_c;
  rep.pass = true;
  for (const auto& phi : bumps) {
    const WeakFormFunctional wf(spec, phi, policy);
    BumpReport b;
    b.center = phi.center();
    b.width = phi.width();
    const auto values = wf.sample(u);
    b.terms = wf.apply(values);
    b.residual = b.terms.residual();
    b.norm = wf.phi_l1() + wf.grad_phi_l1();
    b.normalized = std::fabs(b.residual) / b.norm;
    if constexpr (std::is_same_v<U, GridFunction>) {
      const auto coef = wf.residual_coefficients();
      const auto se = wf.sample_std_errors(u);
      double var = 0.0;
      for (std::size_t i = 0; i < coef.size(); ++i) var += coef[i] * coef[i] * se[i] * se[i];
      b.sigma = std::sqrt(var);
    }
    b.threshold = tol_c * (policy.h + dt) + 3.0 * b.sigma / b.norm;
    b.pass = std::isfinite(b.residual) && b.normalized <= b.threshold;
    rep.pass = rep.pass && b.pass;
    rep.stderr_norm = std::max(rep.stderr_norm, b.sigma / b.norm);
    rep.max_normalized = std::max(rep.max_normalized, b.normalized);
    rep.bumps.push_back(std::move(b));
  }
  rep.measured_c = rep.max_normalized / (rep.stderr_norm + policy.h + dt);
  return rep;
}

}  // namespace

VerifyReport verify_solution(const GridFunction& u, const ProblemSpec& spec, std::span<const TestFunction> bumps,
                             const QuadraturePolicy& policy, double tol_c, double dt) {
  return verify_impl(u, spec, bumps, policy, tol_c, dt);
}

VerifyReport verify_solution(const Expr& u, const ProblemSpec& spec, std::span<const TestFunction> bumps,
                             const QuadraturePolicy& policy, double tol_c, double dt) {
  return verify_impl(u, spec, bumps, policy, tol_c, dt);
}

}  // namespace nlfk
