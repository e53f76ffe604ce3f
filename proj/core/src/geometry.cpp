#include "nlfk/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace nlfk {

namespace {

constexpr double kFeasTol = 1e-9;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw GeometryError(std::string(what) + " must be finite");
}

// Calls fn with every k-subset of {0..n-1} (as an index vector).
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      fn(idx);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

struct PolytopeFacts {
  std::vector<Point> vertices;
  Point incenter;
  double inradius = 0.0;
};

PolytopeFacts analyze_polytope(const Polytope& poly, int d) {
  const int m = static_cast<int>(poly.halfspaces.size());
  Eigen::MatrixXd normals(m, d);
  Eigen::VectorXd offsets(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) normals(i, j) = poly.halfspaces[static_cast<std::size_t>(i)].normal[static_cast<std::size_t>(j)];
    offsets(i) = poly.halfspaces[static_cast<std::size_t>(i)].offset;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> full(normals);
  if (full.rank() < d) throw GeometryError("polytope is unbounded (normals do not span R^d)");

  // Pointed recession cone {v : N v <= 0}; any extreme ray lies in the null
  // space of d-1 independent rows.
  bool unbounded = false;
  for_each_subset(m, d - 1, [&](const std::vector<int>& rows) {
    if (unbounded) return;
    Eigen::VectorXd ray(d);
    if (d == 1) {
      ray(0) = 1.0;
    } else {
      Eigen::MatrixXd sub(d - 1, d);
      for (int r = 0; r < d - 1; ++r) sub.row(r) = normals.row(rows[static_cast<std::size_t>(r)]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (lu.rank() < d - 1) return;
      ray = lu.kernel().col(0).normalized();
    }
    for (double sign : {1.0, -1.0}) {
      const Eigen::VectorXd proj = normals * (sign * ray);
      if (proj.maxCoeff() <= kFeasTol) unbounded = true;
    }
  });
  if (unbounded) throw GeometryError("polytope is unbounded");

  PolytopeFacts facts;
  for_each_subset(m, d, [&](const std::vector<int>& rows) {
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd b(d);
    for (int r = 0; r < d; ++r) {
      a.row(r) = normals.row(rows[static_cast<std::size_t>(r)]);
      b(r) = offsets(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < d) return;
    const Eigen::VectorXd x = lu.solve(b);
    if (((normals * x) - offsets).maxCoeff() > kFeasTol) return;
    Point v(x.data(), x.data() + d);
    for (const auto& w : facts.vertices) {
      double dist = 0.0;
      for (int j = 0; j < d; ++j) dist = std::max(dist, std::fabs(w[static_cast<std::size_t>(j)] - v[static_cast<std::size_t>(j)]));
      if (dist < 1e-9) return;
    }
    facts.vertices.push_back(std::move(v));
  });

  // Chebyshev center: maximize r s.t. n_i . x + r <= o_i; the optimum sits
  // where d+1 constraints are active.
  facts.inradius = -1.0;
  for_each_subset(m, d + 1, [&](const std::vector<int>& rows) {
    Eigen::MatrixXd a(d + 1, d + 1);
    Eigen::VectorXd b(d + 1);
    for (int r = 0; r <= d; ++r) {
      a.block(r, 0, 1, d) = normals.row(rows[static_cast<std::size_t>(r)]);
      a(r, d) = 1.0;
      b(r) = offsets(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < d + 1) return;
    const Eigen::VectorXd sol = lu.solve(b);
    const Eigen::VectorXd x = sol.head(d);
    const double r = sol(d);
    if (((normals * x).array() + r - offsets.array()).maxCoeff() > kFeasTol) return;
    if (r > facts.inradius) {
      facts.inradius = r;
      facts.incenter.assign(x.data(), x.data() + d);
    }
  });
  if (facts.inradius <= 1e-12) throw GeometryError("polytope has empty interior");
  return facts;
}

}  // namespace

Domain::Domain(Shape shape) : shape_(std::move(shape)) {
  std::visit(
      [this](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          dim_ = static_cast<int>(s.center.size());
          diameter_ = 2.0 * s.radius;
          inradius_ = s.radius;
          incenter_ = s.center;
          bbox_lo_ = s.center;
          bbox_hi_ = s.center;
          for (int i = 0; i < dim_; ++i) {
            bbox_lo_[static_cast<std::size_t>(i)] -= s.radius;
            bbox_hi_[static_cast<std::size_t>(i)] += s.radius;
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          dim_ = static_cast<int>(s.lo.size());
          double diag = 0.0;
          inradius_ = std::numeric_limits<double>::infinity();
          incenter_.resize(static_cast<std::size_t>(dim_));
          for (std::size_t i = 0; i < s.lo.size(); ++i) {
            const double w = s.hi[i] - s.lo[i];
            diag += w * w;
            inradius_ = std::min(inradius_, 0.5 * w);
            incenter_[i] = 0.5 * (s.lo[i] + s.hi[i]);
          }
          diameter_ = std::sqrt(diag);
          bbox_lo_ = s.lo;
          bbox_hi_ = s.hi;
        } else {
          dim_ = static_cast<int>(s.halfspaces.front().normal.size());
          auto facts = analyze_polytope(s, dim_);
          vertices_ = std::move(facts.vertices);
          inradius_ = facts.inradius;
          incenter_ = std::move(facts.incenter);
          bbox_lo_ = vertices_.front();
          bbox_hi_ = vertices_.front();
          for (const auto& v : vertices_)
            for (std::size_t i = 0; i < v.size(); ++i) {
              bbox_lo_[i] = std::min(bbox_lo_[i], v[i]);
              bbox_hi_[i] = std::max(bbox_hi_[i], v[i]);
            }
          for (std::size_t a = 0; a < vertices_.size(); ++a)
            for (std::size_t b = a + 1; b < vertices_.size(); ++b) {
              double s2 = 0.0;
              for (std::size_t i = 0; i < vertices_[a].size(); ++i) {
                const double diff = vertices_[a][i] - vertices_[b][i];
                s2 += diff * diff;
              }
              diameter_ = std::max(diameter_, std::sqrt(s2));
            }
        }
      },
      shape_);
}

Domain Domain::ball(Point center, double radius) {
  if (center.empty()) throw GeometryError("ball center must have at least one coordinate");
  require_finite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("ball radius must be > 0");
  return Domain(Ball{std::move(center), radius});
}

Domain Domain::box(Point lo, Point hi) {
  if (lo.empty() || lo.size() != hi.size()) throw GeometryError("box corners must have equal, nonzero dimension");
  require_finite(lo, "box lo");
  require_finite(hi, "box hi");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw GeometryError("box requires lo < hi componentwise");
  return Domain(Box{std::move(lo), std::move(hi)});
}

Domain Domain::polytope(std::vector<Halfspace> halfspaces) {
  if (halfspaces.empty()) throw GeometryError("polytope needs at least one halfspace");
  const std::size_t d = halfspaces.front().normal.size();
  if (d == 0) throw GeometryError("polytope normals must be nonempty");
  for (auto& hs : halfspaces) {
    if (hs.normal.size() != d) throw GeometryError("polytope normals have inconsistent dimension");
    require_finite(hs.normal, "polytope normal");
    if (!std::isfinite(hs.offset)) throw GeometryError("polytope offset must be finite");
    const double n = norm2(hs.normal);
    if (!(n > 0.0)) throw GeometryError("polytope normal must be nonzero");
    for (double& c : hs.normal) c /= n;
    hs.offset /= n;
  }
  return Domain(Polytope{std::move(halfspaces)});
}

bool Domain::contains(std::span<const double> x) const {
  return std::visit(
      [x](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          double r2 = 0.0;
          for (std::size_t i = 0; i < s.center.size(); ++i) {
            const double diff = x[i] - s.center[i];
            r2 += diff * diff;
          }
          return r2 < s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < s.lo.size(); ++i)
            if (!(x[i] > s.lo[i] && x[i] < s.hi[i])) return false;
          return true;
        } else {
          for (const auto& hs : s.halfspaces) {
            double dot = 0.0;
            for (std::size_t i = 0; i < hs.normal.size(); ++i) dot += hs.normal[i] * x[i];
            if (!(dot < hs.offset)) return false;
          }
          return true;
        }
      },
      shape_);
}

double Domain::signed_distance(std::span<const double> x) const {
  return std::visit(
      [x](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          double r2 = 0.0;
          for (std::size_t i = 0; i < s.center.size(); ++i) {
            const double diff = x[i] - s.center[i];
            r2 += diff * diff;
          }
          return std::sqrt(r2) - s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          double outside2 = 0.0;
          double inside = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < s.lo.size(); ++i) {
            const double c = 0.5 * (s.lo[i] + s.hi[i]);
            const double half = 0.5 * (s.hi[i] - s.lo[i]);
            const double q = std::fabs(x[i] - c) - half;
            if (q > 0.0) outside2 += q * q;
            inside = std::max(inside, q);
          }
          return std::sqrt(outside2) + std::min(inside, 0.0);
        } else {
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& hs : s.halfspaces) {
            double dot = 0.0;
            for (std::size_t i = 0; i < hs.normal.size(); ++i) dot += hs.normal[i] * x[i];
            best = std::max(best, dot - hs.offset);
          }
          return best;
        }
      },
      shape_);
}

Point Domain::outward_normal(std::span<const double> z) const {
  return std::visit(
      [z](const auto& s) -> Point {
        using T = std::decay_t<decltype(s)>;
        Point n(z.size(), 0.0);
        if constexpr (std::is_same_v<T, Ball>) {
          for (std::size_t i = 0; i < z.size(); ++i) n[i] = z[i] - s.center[i];
          const double len = norm2(n);
          if (len == 0.0) throw GeometryError("normal undefined at the ball center");
          for (double& c : n) c /= len;
        } else if constexpr (std::is_same_v<T, Box>) {
          std::size_t best = 0;
          double best_q = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < z.size(); ++i) {
            const double c = 0.5 * (s.lo[i] + s.hi[i]);
            const double q = std::fabs(z[i] - c) - 0.5 * (s.hi[i] - s.lo[i]);
            if (q > best_q) {
              best_q = q;
              best = i;
            }
          }
          n[best] = z[best] >= 0.5 * (s.lo[best] + s.hi[best]) ? 1.0 : -1.0;
        } else {
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& hs : s.halfspaces) {
            double dot = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) dot += hs.normal[i] * z[i];
            if (dot - hs.offset > best) {
              best = dot - hs.offset;
              n = hs.normal;
            }
          }
        }
        return n;
      },
      shape_);
}

Point boundary_hit(const Domain& dom, std::span<const double> p, std::span<const double> q, double tol,
                   double& theta) {
  if (!(tol > 0.0)) throw GeometryError("boundary_hit tolerance must be > 0");
  if (!dom.contains(p)) throw GeometryError("boundary_hit: start point is not inside the domain");
  if (dom.contains(q)) throw GeometryError("boundary_hit: end point is inside the domain");
  const std::size_t d = p.size();
  double len2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) len2 += (q[i] - p[i]) * (q[i] - p[i]);
  const double len = std::sqrt(len2);
  const int max_iter = static_cast<int>(std::ceil(std::log2(std::max(len / tol, 1.0)))) + 2;

  Point z(d);
  auto at = [&](double s) {
    for (std::size_t i = 0; i < d; ++i) z[i] = p[i] + s * (q[i] - p[i]);
  };
  double lo = 0.0;  // inside
  double hi = 1.0;  // outside
  double mid = 1.0;
  at(mid);
  if (std::fabs(dom.signed_distance(z)) <= tol) {
    theta = mid;
    return z;
  }
  for (int it = 0; it < max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    at(mid);
    const double sd = dom.signed_distance(z);
    if (std::fabs(sd) <= tol) break;
    if (dom.contains(z))
      lo = mid;
    else
      hi = mid;
  }
  theta = mid;
  return z;
}

Point boundary_hit(const Domain& dom, std::span<const double> p, std::span<const double> q, double tol) {
  double theta = 0.0;
  return boundary_hit(dom, p, q, tol, theta);
}

Point Lattice::point(std::span<const long> k) const {
  Point x(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) x[i] = coord(static_cast<int>(i), k[i]);
  return x;
}

Lattice domain_lattice(const Domain& dom, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("lattice spacing must be > 0");
  return Lattice{dom.bbox_lo(), h};
}

std::vector<std::vector<long>> grid_indices(const Domain& dom, double h) {
  const Lattice lat = domain_lattice(dom, h);
  const std::size_t d = static_cast<std::size_t>(dom.dim());
  std::vector<long> kmax(d);
  for (std::size_t i = 0; i < d; ++i)
    kmax[i] = static_cast<long>(std::floor((dom.bbox_hi()[i] - dom.bbox_lo()[i]) / h)) + 1;

  std::vector<std::vector<long>> out;
  std::vector<long> k(d, 0);
  Point x(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = lat.coord(static_cast<int>(i), k[i]);
    if (dom.contains(x)) out.push_back(k);
    std::size_t axis = d;
    while (axis > 0) {
      --axis;
      if (++k[axis] <= kmax[axis]) break;
      k[axis] = 0;
      if (axis == 0) return out;
    }
  }
}

std::vector<Point> grid_points(const Domain& dom, double h) {
  const Lattice lat = domain_lattice(dom, h);
  std::vector<Point> pts;
  for (const auto& k : grid_indices(dom, h)) pts.push_back(lat.point(k));
  return pts;
}

}  // namespace nlfk
