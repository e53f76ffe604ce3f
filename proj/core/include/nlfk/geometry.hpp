#pragma once

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace nlfk {

using Point = std::vector<double>;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Ball {
  Point center;
  double radius = 1.0;
};

struct Box {
  Point lo;
  Point hi;
};

struct Halfspace {
  Point normal;  // unit length after construction
  double offset = 0.0;  // {x : normal . x <= offset}
};

struct Polytope {
  std::vector<Halfspace> halfspaces;
};

/// Bounded open Lipschitz region: a ball, an axis-aligned box, or a convex
/// polytope. Immutable after construction.
class Domain {
 public:
  using Shape = std::variant<Ball, Box, Polytope>;

  static Domain ball(Point center, double radius);
  static Domain box(Point lo, Point hi);
  /// Normals are normalized; the polytope must be bounded with nonempty
  /// interior (checked by vertex enumeration).
  static Domain polytope(std::vector<Halfspace> halfspaces);

  int dim() const noexcept { return dim_; }
  const Shape& shape() const noexcept { return shape_; }

  /// Open interior membership.
  bool contains(std::span<const double> x) const;

  /// Negative inside, positive outside. Exact for balls and boxes; for
  /// polytopes the max over halfspace distances (exact sign, 1-Lipschitz).
  double signed_distance(std::span<const double> x) const;

  double diameter() const noexcept { return diameter_; }
  /// Radius of the largest inscribed ball and its center.
  double inradius() const noexcept { return inradius_; }
  const Point& incenter() const noexcept { return incenter_; }
  const Point& bbox_lo() const noexcept { return bbox_lo_; }
  const Point& bbox_hi() const noexcept { return bbox_hi_; }

  /// Empty unless the domain is a polytope.
  const std::vector<Point>& vertices() const noexcept { return vertices_; }

  /// Outward unit normal at (or near) a boundary point.
  Point outward_normal(std::span<const double> z) const;

 private:
  explicit Domain(Shape shape);

  Shape shape_;
  int dim_ = 0;
  double diameter_ = 0.0;
  double inradius_ = 0.0;
  Point incenter_;
  Point bbox_lo_;
  Point bbox_hi_;
  std::vector<Point> vertices_;
};

inline bool contains(const Domain& dom, std::span<const double> x) { return dom.contains(x); }
inline double signed_distance(const Domain& dom, std::span<const double> x) { return dom.signed_distance(x); }

/// Point on [p, q] within tol of the zero level set, found by bisection in
/// at most ceil(log2(|q - p| / tol)) + 2 iterations. Requires p inside and q
/// outside.
Point boundary_hit(const Domain& dom, std::span<const double> p, std::span<const double> q, double tol);

/// Same as boundary_hit but also returns the fraction theta in [0, 1] along
/// the segment.
Point boundary_hit(const Domain& dom, std::span<const double> p, std::span<const double> q, double tol,
                   double& theta);

/// Integer coordinates of the h-lattice anchored at the bounding-box lower
/// corner: x_i = lo_i + k_i * h.
struct Lattice {
  Point anchor;
  double h = 0.0;

  double coord(int axis, long k) const { return anchor[static_cast<std::size_t>(axis)] + static_cast<double>(k) * h; }
  Point point(std::span<const long> k) const;
};

Lattice domain_lattice(const Domain& dom, double h);

/// All lattice points strictly inside the domain, lexicographic order (first
/// coordinate slowest). Empty when h is too coarse.
std::vector<Point> grid_points(const Domain& dom, double h);

/// Same points as grid_points with their integer lattice indices.
std::vector<std::vector<long>> grid_indices(const Domain& dom, double h);

}  // namespace nlfk
