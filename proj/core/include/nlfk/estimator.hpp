#pragma once

// Monte Carlo aggregation of the Feynman-Kac payoff
//   u(x) = E_x[ e(tau) g(X_tau) + int_0^tau e(s) f(X_s) ds ]
// and empirical checks of the process bounds (heat-kernel sandwich, exit
// tail, small-time displacement, occupation, boundary behaviour).
//
// Stream contract: path i of a point solve uses stream_id first_stream + i;
// grid point k uses the block [first_stream + k n, first_stream + (k+1) n).
// Reductions run in stream order, so results do not depend on the worker
// count.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nlfk/geometry.hpp"
#include "nlfk/model.hpp"
#include "nlfk/pathsim.hpp"
#include "nlfk/stats.hpp"

namespace nlfk {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  long n_censored = 0;
  long n_poisoned = 0;
  double wallclock = 0.0;  // seconds

  double censored_fraction() const { return n_paths > 0 ? static_cast<double>(n_censored) / n_paths : 0.0; }
};

struct SolveOptions {
  long n_paths = 1000;
  PathConfig path;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  int threads = 1;
};

/// Payoff of one record under the censor policy: censored paths contribute
/// their source integral with g replaced by 0; poisoned paths return nullopt.
std::optional<double> policy_payoff(const ExitRecord& rec, const ProblemSpec& spec);

/// Mean and standard error of the per-path values (NaN entries are skipped
/// and counted as poisoned).
Estimate summarize(std::span<const double> values, std::span<const ExitKind> kinds);

Estimate solve_point(const ProblemSpec& spec, std::span<const double> x, const SolveOptions& opts);

/// u sampled on the interior h-lattice of D; exterior values come from g.
class GridFunction {
 public:
  GridFunction(const Domain& domain, double h);

  const Domain& domain() const noexcept { return domain_; }
  double h() const noexcept { return h_; }
  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<std::vector<long>>& indices() const noexcept { return indices_; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// Optional per-point Monte Carlo standard errors (empty when unknown).
  std::vector<double>& std_errors() noexcept { return std_errors_; }
  const std::vector<double>& std_errors() const noexcept { return std_errors_; }

  /// Slot of a lattice index, or -1 when the node is not an interior grid point.
  long slot(std::span<const long> k) const;

 private:
  Domain domain_;
  double h_;
  Lattice lattice_;
  std::vector<std::vector<long>> indices_;
  std::vector<Point> points_;
  std::vector<long> extents_;
  std::vector<long> slots_;
  std::vector<double> values_;
  std::vector<double> std_errors_;
};

struct GridSolution {
  GridFunction u;
  std::vector<Estimate> estimates;
};

GridSolution solve_grid(const ProblemSpec& spec, double h, const SolveOptions& opts);

struct SurvivalFit {
  std::vector<double> times;
  std::vector<double> log_survival;
  LinearFit fit;       // log P(tau > t) = intercept + slope t
  double decay_rate = 0.0;  // -slope, the fitted exponential rate
  bool valid = false;
};

/// Fits log P(tau > t) on [t_from, t_end] where t_end keeps at least
/// `min_count` survivors; `points` grid nodes.
SurvivalFit survival_fit(std::span<const double> taus, double t_from, std::size_t min_count = 30,
                         std::size_t points = 20);

struct ExitStatistics {
  Estimate xi;  // E_x[g(X_tau)] with g = 0 for censored paths
  std::vector<ExitRecord> records;
  long n_continuous = 0;
  long n_jump = 0;
  long n_censored = 0;
  long n_poisoned = 0;
  std::vector<double> tau_edges;
  std::vector<long> tau_counts;
  SurvivalFit survival;
};

ExitStatistics exit_statistics(const ProblemSpec& spec, std::span<const double> x, const SolveOptions& opts,
                               double survival_from = 1.0, std::size_t tau_bins = 50);

/// E_x[int_0^tau v(X_s) ds] by left-point accumulation along each path.
Estimate occupation_estimate(const ProblemSpec& spec, const Expr& v, std::span<const double> x,
                             const SolveOptions& opts);

struct DensityReport {
  double t = 0.0;
  long n_samples = 0;
  std::vector<double> edges;  // radial bin edges of |X_t - x0|
  std::vector<long> counts;
  std::vector<double> density;  // count / (n * shell volume)
  long min_count = 100;
  // Fitted envelope C1 q_{C2} <= p <= C3 q_{C4} on qualifying bins.
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  long qualifying_bins = 0;
  long violations = 0;
};

/// q_rho(t, r) = t^{-d/2} exp(-rho r^2 / t) + min(t^{-d/2}, t / r^{d+alpha}).
double q_rho(int d, double alpha, double rho, double t, double r);

/// Histogram of X_t for the unkilled process started at x0, with the fitted
/// heat-kernel envelope. `euler_dt` is only used when the spec has a drift.
DensityReport empirical_density(const ProblemSpec& spec, double t, std::span<const double> x0,
                                std::span<const double> edges, const SolveOptions& opts,
                                long min_count = 100, double euler_dt = 1e-3);

/// Shell average of the Brownian density (4 pi t)^{-d/2} exp(-r^2/(4t)) over
/// r0 <= |z| < r1.
double brownian_shell_density(int d, double t, double r0, double r1);

/// log density vs log radius over bins with r0 >= r_from and count >= min_count.
LinearFit log_log_tail(std::span<const double> edges, std::span<const double> density,
                       std::span<const long> counts, double r_from, long min_count);

struct DisplacementRow {
  Point start;
  double probability = 0.0;
  double std_error = 0.0;
};

struct DisplacementTable {
  double t = 0.0;
  double r = 0.0;
  std::vector<DisplacementRow> rows;
  double sup_probability = 0.0;
  double sup_std_error = 0.0;
};

/// P_x(sup_{s<=t} |X_s - x| > r) for each start, monitored on a dt grid.
DisplacementTable displacement_probability(const ProblemSpec& spec, std::span<const Point> starts, double t,
                                           double r, double monitor_dt, const SolveOptions& opts);

struct ProbeRow {
  double r = 0.0;
  Point x;
  Estimate u;
};

struct BoundaryProbe {
  Point z;
  double g_at_z = 0.0;
  std::vector<ProbeRow> rows;
};

/// u at z + r * (inward normal) for each radius; distinct stream blocks per probe.
BoundaryProbe boundary_continuity_probe(const ProblemSpec& spec, std::span<const double> z,
                                        std::span<const double> radii, const SolveOptions& opts);

struct JumpTail {
  std::vector<double> edges;
  std::vector<long> counts;
  std::vector<double> density;  // per unit volume of |X_tau - x0|
  LinearFit fit;
};

/// Volume density of |X_tau - x0| over jump exits and its log-log slope
/// beyond r_from (expected near -(d + alpha)).
JumpTail jump_exit_tail(const ExitStatistics& stats, std::span<const double> x0,
                        std::span<const double> edges, double r_from, long min_count = 20);

}  // namespace nlfk
