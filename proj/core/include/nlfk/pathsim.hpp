#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlfk/model.hpp"
#include "nlfk/rng.hpp"

namespace nlfk {

struct PathConfig {
  double dt = 1e-3;
  double t_max = 20.0;     // censoring horizon
  double hit_tol = 0.0;    // bisection tolerance; 0 selects 1e-10 * diam(D)
  bool record_trace = false;

  void check() const;
  double resolved_hit_tol(const Domain& dom) const { return hit_tol > 0.0 ? hit_tol : 1e-10 * dom.diameter(); }
};

/// `poisoned` marks a path aborted by a field evaluation failure; it is
/// excluded from estimates and counted separately.
enum class ExitKind { continuous, jump, censored, poisoned };

const char* to_string(ExitKind kind) noexcept;

struct TraceRow {
  double t = 0.0;
  Point x;
  double log_weight = 0.0;
  double source_integral = 0.0;
  std::string event;
};

struct ExitRecord {
  double tau = 0.0;
  Point exit_point;
  ExitKind kind = ExitKind::censored;
  double log_weight = 0.0;       // int_0^tau c(X_s) ds
  double source_integral = 0.0;  // int_0^tau e(s) f(X_s) ds
  double occupation = 0.0;       // int_0^tau v(X_s) ds when requested
  long steps = 0;
  double sup_displacement = 0.0;
  std::string error;  // set for poisoned records
  std::vector<TraceRow> trace;
};

struct PathState {
  double t = 0.0;
  Point x;
  double log_weight = 0.0;
  double source_integral = 0.0;
  double occupation = 0.0;
  long steps = 0;
  double sup_displacement = 0.0;
};

/// Euler composition of drift -> diffusion -> jump for X, with left-point
/// accumulation of e(t) and the source integral. Holds scratch buffers, so
/// one instance per worker.
class PathSimulator {
 public:
  PathSimulator(const ProblemSpec& spec, const PathConfig& cfg, const Expr* occupation = nullptr);

  /// Advances one step from `state` (which must be inside D). Returns the
  /// exit record when the path leaves D or reaches t_max.
  std::optional<ExitRecord> step(PathState& state, RngStream& rng);

  ExitRecord simulate(std::span<const double> x0, RngStream& rng);

 private:
  ExitRecord finish(PathState& state, ExitKind kind, double tau, std::span<const double> exit_point);
  void push_trace(const PathState& state, const char* event);

  const ProblemSpec& spec_;
  PathConfig cfg_;
  const Expr* occupation_;
  double hit_tol_;
  Point x0_;
  Point drift_;
  Point moved_;
  std::vector<TraceRow> trace_;
};

ExitRecord simulate_exit(const ProblemSpec& spec, std::span<const double> x0, const PathConfig& cfg,
                         RngStream& rng);

/// exp(log_weight) * g(exit_point) + source_integral. Throws
/// std::invalid_argument for censored or poisoned records (the estimator
/// applies its censor policy instead).
double feynman_kac_payoff(const ExitRecord& rec, const ProblemSpec& spec);

/// Position at time t of the unkilled process (drift clamped to 0 off D)
/// together with the running sup of |X_s - x0| over the step grid. With no
/// drift and dt >= t the increment is drawn exactly in one step.
struct FreeSample {
  Point x;
  double sup_displacement = 0.0;
};

FreeSample simulate_free(const ProblemSpec& spec, std::span<const double> x0, double t, double dt,
                         RngStream& rng);

/// CSV rows (t, x1..xd, log_weight, source_integral, event).
void write_trace_csv(std::ostream& os, const ExitRecord& rec, int dim);

}  // namespace nlfk
