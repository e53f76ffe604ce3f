#include "nlfk/pathsim.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nlfk/sampler.hpp"

namespace nlfk {

void PathConfig::check() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be > 0");
  if (!(dt < t_max)) throw std::invalid_argument("dt must be smaller than t_max");
  if (hit_tol < 0.0) throw std::invalid_argument("hit_tol must be >= 0");
}

const char* to_string(ExitKind kind) noexcept {
  switch (kind) {
    case ExitKind::continuous: return "continuous";
    case ExitKind::jump: return "jump";
    case ExitKind::censored: return "censored";
    case ExitKind::poisoned: return "poisoned";
  }
  return "?";
}

namespace {
double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}
}  // namespace

PathSimulator::PathSimulator(const ProblemSpec& spec, const PathConfig& cfg, const Expr* occupation)
    : spec_(spec),
      cfg_(cfg),
      occupation_(occupation),
      hit_tol_(cfg.resolved_hit_tol(spec.domain)),
      drift_(static_cast<std::size_t>(spec.dim)),
      moved_(static_cast<std::size_t>(spec.dim)) {
  cfg_.check();
}

void PathSimulator::push_trace(const PathState& state, const char* event) {
  if (cfg_.record_trace) trace_.push_back({state.t, state.x, state.log_weight, state.source_integral, event});
}

ExitRecord PathSimulator::finish(PathState& state, ExitKind kind, double tau, std::span<const double> exit_point) {
  ExitRecord rec;
  rec.tau = tau;
  rec.exit_point.assign(exit_point.begin(), exit_point.end());
  rec.kind = kind;
  rec.log_weight = state.log_weight;
  rec.source_integral = state.source_integral;
  rec.occupation = state.occupation;
  rec.steps = state.steps;
  rec.sup_displacement = state.sup_displacement;
  if (cfg_.record_trace) {
    PathState end = state;
    end.t = tau;
    end.x = rec.exit_point;
    push_trace(end, kind == ExitKind::continuous ? "exit_continuous"
                    : kind == ExitKind::jump     ? "exit_jump"
                                                 : "censored");
    rec.trace = std::move(trace_);
    trace_.clear();
  }
  return rec;
}

std::optional<ExitRecord> PathSimulator::step(PathState& state, RngStream& rng) {
  const std::span<const double> x(state.x);
  double dt = cfg_.dt;
  bool last = false;
  if (state.t + dt >= cfg_.t_max * (1.0 - 1e-12)) {
    dt = cfg_.t_max - state.t;
    last = true;
  }

  // (i) left-point values, applied once the elapsed fraction is known.
  const double cx = spec_.c.is_constant() ? spec_.c.constant_value() : spec_.c(x);
  const bool has_source = !(spec_.f.is_constant() && spec_.f.constant_value() == 0.0);
  const double fx = !has_source ? 0.0 : spec_.f.is_constant() ? spec_.f.constant_value() : spec_.f(x);
  const double vx = occupation_ == nullptr ? 0.0 : (*occupation_)(x);
  auto accumulate = [&](double elapsed) {
    if (has_source) state.source_integral += std::exp(state.log_weight) * fx * elapsed;
    state.log_weight += cx * elapsed;
    state.occupation += vx * elapsed;
  };

  // (ii) drift and (iii) diffusion form the continuous part of the step.
  std::copy(state.x.begin(), state.x.end(), moved_.begin());
  bool moved = false;
  if (spec_.has_drift()) {
    spec_.drift_at(x, drift_);
    for (std::size_t i = 0; i < moved_.size(); ++i) moved_[i] += drift_[i] * dt;
    moved = true;
  }
  if (spec_.sigma == 1) {
    const double scale = std::sqrt(2.0 * dt);
    for (double& v : moved_) v += scale * rng.normal();
    moved = true;
  }
  ++state.steps;
  if (moved && !spec_.domain.contains(moved_)) {
    double theta = 1.0;
    const Point z = boundary_hit(spec_.domain, x, moved_, hit_tol_, theta);
    accumulate(theta * dt);
    state.sup_displacement = std::max(state.sup_displacement, distance(z, x0_));
    return finish(state, ExitKind::continuous, state.t + theta * dt, z);
  }

  // (iv) jump part; landing point is exact.
  add_stable_increment(rng, dt, spec_.alpha, spec_.a, moved_);
  accumulate(dt);
  state.t = last ? cfg_.t_max : state.t + dt;
  state.sup_displacement = std::max(state.sup_displacement, distance(moved_, x0_));
  if (!spec_.domain.contains(moved_)) return finish(state, ExitKind::jump, state.t, moved_);

  std::copy(moved_.begin(), moved_.end(), state.x.begin());
  if (last) return finish(state, ExitKind::censored, cfg_.t_max, state.x);
  push_trace(state, "step");
  return std::nullopt;
}

ExitRecord PathSimulator::simulate(std::span<const double> x0, RngStream& rng) {
  if (x0.size() != static_cast<std::size_t>(spec_.dim)) throw std::invalid_argument("start point has wrong dimension");
  if (!spec_.domain.contains(x0)) throw std::invalid_argument("start point must lie inside D");
  x0_.assign(x0.begin(), x0.end());
  trace_.clear();
  PathState state;
  state.x = x0_;
  push_trace(state, "start");
  try {
    while (true) {
      if (auto rec = step(state, rng)) return std::move(*rec);
    }
  } catch (const EvalError& e) {
    ExitRecord rec;
    rec.kind = ExitKind::poisoned;
    rec.tau = state.t;
    rec.exit_point = state.x;
    rec.log_weight = state.log_weight;
    rec.source_integral = state.source_integral;
    rec.steps = state.steps;
    rec.sup_displacement = state.sup_displacement;
    rec.error = e.what();
    trace_.clear();
    return rec;
  }
}

ExitRecord simulate_exit(const ProblemSpec& spec, std::span<const double> x0, const PathConfig& cfg,
                         RngStream& rng) {
  PathSimulator sim(spec, cfg);
  return sim.simulate(x0, rng);
}

double feynman_kac_payoff(const ExitRecord& rec, const ProblemSpec& spec) {
  if (rec.kind == ExitKind::censored || rec.kind == ExitKind::poisoned)
    throw std::invalid_argument(std::string("feynman_kac_payoff: record is ") + to_string(rec.kind));
  const double gz = spec.g.is_constant() ? spec.g.constant_value() : spec.g(rec.exit_point);
  return std::exp(rec.log_weight) * gz + rec.source_integral;
}

FreeSample simulate_free(const ProblemSpec& spec, std::span<const double> x0, double t, double dt,
                         RngStream& rng) {
  if (!(t > 0.0) || !(dt > 0.0)) throw std::invalid_argument("simulate_free: t and dt must be > 0");
  const std::size_t d = static_cast<std::size_t>(spec.dim);
  FreeSample out;
  out.x.assign(x0.begin(), x0.end());
  const long n = std::max(1L, static_cast<long>(std::ceil(t / dt - 1e-9)));
  const double h = t / static_cast<double>(n);
  Point drift(d);
  const bool has_drift = spec.has_drift();
  const double scale = std::sqrt(2.0 * h);
  for (long k = 0; k < n; ++k) {
    if (has_drift) {
      spec.drift_at(out.x, drift);
      for (std::size_t i = 0; i < d; ++i) out.x[i] += drift[i] * h;
    }
    if (spec.sigma == 1)
      for (double& v : out.x) v += scale * rng.normal();
    add_stable_increment(rng, h, spec.alpha, spec.a, out.x);
    out.sup_displacement = std::max(out.sup_displacement, distance(out.x, x0));
  }
  return out;
}

void write_trace_csv(std::ostream& os, const ExitRecord& rec, int dim) {
  os << "t";
  for (int i = 1; i <= dim; ++i) os << ",x" << i;
  os << ",log_weight,source_integral,event\n";
  os.precision(17);
  for (const auto& row : rec.trace) {
    os << row.t;
    for (double v : row.x) os << ',' << v;
    os << ',' << row.log_weight << ',' << row.source_integral << ',' << row.event << '\n';
  }
}

}  // namespace nlfk
