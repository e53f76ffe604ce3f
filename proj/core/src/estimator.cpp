#include "nlfk/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nlfk/quadrature.hpp"

namespace nlfk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_options(const SolveOptions& opts) {
  if (opts.n_paths < 2) throw std::invalid_argument("n_paths must be >= 2");
  opts.path.check();
}

constexpr std::size_t kChunk = 512;

// Runs n paths from x, storing per-path outputs of `reduce` in stream order.
template <typename PerPath>
void run_paths(const ProblemSpec& spec, std::span<const double> x, const SolveOptions& opts, const Expr* occupation,
               PerPath&& per_path) {
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    PathSimulator sim(spec, opts.path, occupation);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      RngStream rng(opts.seed, opts.first_stream + i);
      per_path(i, sim.simulate(x, rng));
    }
  });
}

}  // namespace

std::optional<double> policy_payoff(const ExitRecord& rec, const ProblemSpec& spec) {
  switch (rec.kind) {
    case ExitKind::poisoned: return std::nullopt;
    case ExitKind::censored: return rec.source_integral;
    default:
      try {
        return feynman_kac_payoff(rec, spec);
      } catch (const EvalError&) {
        return std::nullopt;
      }
  }
}

Estimate summarize(std::span<const double> values, std::span<const ExitKind> kinds) {
  Estimate est;
  est.n_paths = static_cast<long>(values.size());
  double sum = 0.0;
  long n_ok = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (kinds[i] == ExitKind::censored) ++est.n_censored;
    if (kinds[i] == ExitKind::poisoned || std::isnan(values[i])) {
      ++est.n_poisoned;
      continue;
    }
    sum += values[i];
    ++n_ok;
  }
  if (n_ok == 0) {
    est.mean = std::numeric_limits<double>::quiet_NaN();
    est.std_error = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.mean = sum / static_cast<double>(n_ok);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (kinds[i] == ExitKind::poisoned || std::isnan(values[i])) continue;
    const double dev = values[i] - est.mean;
    ss += dev * dev;
  }
  est.std_error = n_ok > 1 ? std::sqrt(ss / static_cast<double>(n_ok - 1) / static_cast<double>(n_ok)) : 0.0;
  return est;
}

Estimate solve_point(const ProblemSpec& spec, std::span<const double> x, const SolveOptions& opts) {
  check_options(opts);
  const auto start = Clock::now();
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  std::vector<double> payoff(n);
  std::vector<ExitKind> kinds(n);
  run_paths(spec, x, opts, nullptr, [&](std::size_t i, const ExitRecord& rec) {
    kinds[i] = rec.kind;
    payoff[i] = policy_payoff(rec, spec).value_or(std::numeric_limits<double>::quiet_NaN());
  });
  Estimate est = summarize(payoff, kinds);
  est.wallclock = seconds_since(start);
  return est;
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(const Domain& domain, double h)
    : domain_(domain), h_(h), lattice_(domain_lattice(domain, h)), indices_(grid_indices(domain, h)) {
  const std::size_t d = static_cast<std::size_t>(domain.dim());
  extents_.resize(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    extents_[i] = static_cast<long>(std::floor((domain.bbox_hi()[i] - domain.bbox_lo()[i]) / h)) + 2;
    total *= static_cast<std::size_t>(extents_[i]);
  }
  slots_.assign(total, -1);
  points_.reserve(indices_.size());
  for (std::size_t s = 0; s < indices_.size(); ++s) {
    points_.push_back(lattice_.point(indices_[s]));
    std::size_t lin = 0;
    for (std::size_t i = 0; i < d; ++i) lin = lin * static_cast<std::size_t>(extents_[i]) + static_cast<std::size_t>(indices_[s][i]);
    slots_[lin] = static_cast<long>(s);
  }
  values_.assign(indices_.size(), 0.0);
}

long GridFunction::slot(std::span<const long> k) const {
  std::size_t lin = 0;
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    if (k[i] < 0 || k[i] >= extents_[i]) return -1;
    lin = lin * static_cast<std::size_t>(extents_[i]) + static_cast<std::size_t>(k[i]);
  }
  return slots_[lin];
}

GridSolution solve_grid(const ProblemSpec& spec, double h, const SolveOptions& opts) {
  check_options(opts);
  GridSolution sol{GridFunction(spec.domain, h), {}};
  const std::size_t npts = sol.u.size();
  if (npts == 0) throw std::invalid_argument("solve_grid: lattice has no interior points (h too coarse)");
  sol.estimates.resize(npts);
  sol.u.std_errors().assign(npts, 0.0);
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);

  parallel_for(npts, opts.threads, [&](std::size_t k) {
    const auto start = Clock::now();
    PathSimulator sim(spec, opts.path);
    std::vector<double> payoff(n);
    std::vector<ExitKind> kinds(n);
    const std::uint64_t base = opts.first_stream + static_cast<std::uint64_t>(k) * n;
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng(opts.seed, base + i);
      const ExitRecord rec = sim.simulate(sol.u.points()[k], rng);
      kinds[i] = rec.kind;
      payoff[i] = policy_payoff(rec, spec).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    Estimate est = summarize(payoff, kinds);
    est.wallclock = seconds_since(start);
    sol.estimates[k] = est;
    sol.u.values()[k] = est.mean;
    sol.u.std_errors()[k] = est.std_error;
  });
  return sol;
}

// ---------------------------------------------------------------------------

SurvivalFit survival_fit(std::span<const double> taus, double t_from, std::size_t min_count, std::size_t points) {
  SurvivalFit out;
  if (taus.size() <= min_count || points < 3) return out;
  std::vector<double> sorted(taus.begin(), taus.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double t_end = sorted[n - min_count];
  if (!(t_end > t_from)) return out;
  for (std::size_t k = 0; k < points; ++k) {
    const double t = t_from + (t_end - t_from) * static_cast<double>(k) / static_cast<double>(points - 1);
    const auto survivors = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    if (survivors <= 0.0) break;
    out.times.push_back(t);
    out.log_survival.push_back(std::log(survivors / static_cast<double>(n)));
  }
  if (out.times.size() < 3) return out;
  out.fit = linear_fit(out.times, out.log_survival);
  out.decay_rate = -out.fit.slope;
  out.valid = true;
  return out;
}

ExitStatistics exit_statistics(const ProblemSpec& spec, std::span<const double> x, const SolveOptions& opts,
                               double survival_from, std::size_t tau_bins) {
  check_options(opts);
  const auto start = Clock::now();
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  ExitStatistics stats;
  stats.records.resize(n);
  SolveOptions quiet = opts;
  quiet.path.record_trace = false;
  run_paths(spec, x, quiet, nullptr, [&](std::size_t i, ExitRecord rec) { stats.records[i] = std::move(rec); });

  std::vector<double> gvals(n);
  std::vector<ExitKind> kinds(n);
  std::vector<double> taus;
  taus.reserve(n);
  double tau_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ExitRecord& rec = stats.records[i];
    kinds[i] = rec.kind;
    switch (rec.kind) {
      case ExitKind::continuous: ++stats.n_continuous; break;
      case ExitKind::jump: ++stats.n_jump; break;
      case ExitKind::censored: ++stats.n_censored; break;
      case ExitKind::poisoned: ++stats.n_poisoned; break;
    }
    if (rec.kind == ExitKind::poisoned) {
      gvals[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    taus.push_back(rec.tau);
    tau_max = std::max(tau_max, rec.tau);
    if (rec.kind == ExitKind::censored) {
      gvals[i] = 0.0;
      continue;
    }
    try {
      gvals[i] = spec.g(rec.exit_point);
    } catch (const EvalError&) {
      gvals[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  stats.xi = summarize(gvals, kinds);

  if (tau_bins > 0 && tau_max > 0.0) {
    stats.tau_edges.resize(tau_bins + 1);
    for (std::size_t b = 0; b <= tau_bins; ++b)
      stats.tau_edges[b] = tau_max * static_cast<double>(b) / static_cast<double>(tau_bins);
    stats.tau_counts.assign(tau_bins, 0);
    for (double t : taus) {
      auto b = static_cast<std::size_t>(t / tau_max * static_cast<double>(tau_bins));
      stats.tau_counts[std::min(b, tau_bins - 1)]++;
    }
  }
  stats.survival = survival_fit(taus, survival_from);
  stats.xi.wallclock = seconds_since(start);
  return stats;
}

Estimate occupation_estimate(const ProblemSpec& spec, const Expr& v, std::span<const double> x,
                             const SolveOptions& opts) {
  check_options(opts);
  const auto start = Clock::now();
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  std::vector<double> occ(n);
  std::vector<ExitKind> kinds(n);
  run_paths(spec, x, opts, &v, [&](std::size_t i, const ExitRecord& rec) {
    kinds[i] = rec.kind;
    occ[i] = rec.kind == ExitKind::poisoned ? std::numeric_limits<double>::quiet_NaN() : rec.occupation;
  });
  Estimate est = summarize(occ, kinds);
  est.wallclock = seconds_since(start);
  return est;
}

// ---------------------------------------------------------------------------

double q_rho(int d, double alpha, double rho, double t, double r) {
  const double gauss = std::pow(t, -0.5 * d) * std::exp(-rho * r * r / t);
  const double jump = r > 0.0 ? std::min(std::pow(t, -0.5 * d), t / std::pow(r, d + alpha)) : std::pow(t, -0.5 * d);
  return gauss + jump;
}

double brownian_shell_density(int d, double t, double r0, double r1) {
  const Rule1D gl = gauss_legendre(20, r0, r1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = gl.nodes[i];
    const double w = gl.weights[i] * std::pow(r, d - 1);
    num += w * std::pow(4.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
    den += w;
  }
  return num / den;
}

namespace {

double shell_volume(int d, double r0, double r1) { return ball_volume(d) * (std::pow(r1, d) - std::pow(r0, d)); }

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]) || edges[i - 1] < 0.0)
      throw std::invalid_argument("histogram edges must be nonnegative and increasing");
}

long bin_of(std::span<const double> edges, double r) {
  if (r < edges.front() || r >= edges.back()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), r);
  return static_cast<long>(it - edges.begin()) - 1;
}

}  // namespace

DensityReport empirical_density(const ProblemSpec& spec, double t, std::span<const double> x0,
                                std::span<const double> edges, const SolveOptions& opts, long min_count,
                                double euler_dt) {
  if (!(t > 0.0)) throw std::invalid_argument("empirical_density: t must be > 0");
  check_edges(edges);
  const int d = spec.dim;
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  const std::size_t nb = edges.size() - 1;
  const double dt = spec.has_drift() ? euler_dt : t;

  std::vector<long> bins(n);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      RngStream rng(opts.seed, opts.first_stream + i);
      const FreeSample s = simulate_free(spec, x0, t, dt, rng);
      double r2 = 0.0;
      for (std::size_t j = 0; j < s.x.size(); ++j) r2 += (s.x[j] - x0[j]) * (s.x[j] - x0[j]);
      bins[i] = bin_of(edges, std::sqrt(r2));
    }
  });

  DensityReport rep;
  rep.t = t;
  rep.n_samples = opts.n_paths;
  rep.edges.assign(edges.begin(), edges.end());
  rep.counts.assign(nb, 0);
  rep.min_count = min_count;
  for (long b : bins)
    if (b >= 0) rep.counts[static_cast<std::size_t>(b)]++;
  rep.density.resize(nb);
  for (std::size_t b = 0; b < nb; ++b)
    rep.density[b] = static_cast<double>(rep.counts[b]) / (static_cast<double>(n) * shell_volume(d, edges[b], edges[b + 1]));

  // Envelope fit: for each rho the tightest constant is the min (lower) or max
  // (upper) density ratio; rho is then picked by least squares in log space.
  std::vector<std::size_t> qual;
  for (std::size_t b = 0; b < nb; ++b)
    if (rep.counts[b] >= min_count) qual.push_back(b);
  rep.qualifying_bins = static_cast<long>(qual.size());
  rep.lower.assign(nb, 0.0);
  rep.upper.assign(nb, 0.0);
  if (qual.empty()) return rep;

  auto mid = [&](std::size_t b) { return 0.5 * (edges[b] + edges[b + 1]); };
  double best_lower = std::numeric_limits<double>::infinity();
  double best_upper = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 120; ++k) {
    const double rho = std::pow(10.0, -3.0 + 6.0 * k / 120.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t b : qual) {
      const double ratio = rep.density[b] / q_rho(d, spec.alpha, rho, t, mid(b));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    double loss_lo = 0.0, loss_hi = 0.0;
    for (std::size_t b : qual) {
      const double lq = std::log(q_rho(d, spec.alpha, rho, t, mid(b)));
      const double lp = std::log(rep.density[b]);
      loss_lo += std::pow(lp - (std::log(lo) + lq), 2);
      loss_hi += std::pow(std::log(hi) + lq - lp, 2);
    }
    if (loss_lo < best_lower) {
      best_lower = loss_lo;
      rep.c1 = lo;
      rep.c2 = rho;
    }
    if (loss_hi < best_upper) {
      best_upper = loss_hi;
      rep.c3 = hi;
      rep.c4 = rho;
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    rep.lower[b] = rep.c1 * q_rho(d, spec.alpha, rep.c2, t, mid(b));
    rep.upper[b] = rep.c3 * q_rho(d, spec.alpha, rep.c4, t, mid(b));
  }
  for (std::size_t b : qual)
    if (rep.density[b] < rep.lower[b] * (1.0 - 1e-9) || rep.density[b] > rep.upper[b] * (1.0 + 1e-9))
      ++rep.violations;
  return rep;
}

LinearFit log_log_tail(std::span<const double> edges, std::span<const double> density, std::span<const long> counts,
                       double r_from, long min_count) {
  std::vector<double> lx, ly;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (edges[b] < r_from || counts[b] < min_count || !(density[b] > 0.0)) continue;
    lx.push_back(std::log(std::sqrt(edges[b] * edges[b + 1])));
    ly.push_back(std::log(density[b]));
  }
  if (lx.size() < 2) throw std::invalid_argument("log_log_tail: fewer than two qualifying bins");
  return linear_fit(lx, ly);
}

DisplacementTable displacement_probability(const ProblemSpec& spec, std::span<const Point> starts, double t,
                                           double r, double monitor_dt, const SolveOptions& opts) {
  if (opts.n_paths < 2) throw std::invalid_argument("n_paths must be >= 2");
  const std::size_t n = static_cast<std::size_t>(opts.n_paths);
  DisplacementTable table;
  table.t = t;
  table.r = r;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    std::vector<unsigned char> hit(n, 0);
    const std::uint64_t base = opts.first_stream + j * n;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, opts.threads, [&](std::size_t c) {
      const std::size_t end = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        RngStream rng(opts.seed, base + i);
        hit[i] = simulate_free(spec, starts[j], t, monitor_dt, rng).sup_displacement > r ? 1 : 0;
      }
    });
    long count = 0;
    for (unsigned char h : hit) count += h;
    DisplacementRow row;
    row.start = starts[j];
    row.probability = static_cast<double>(count) / static_cast<double>(n);
    row.std_error = std::sqrt(row.probability * (1.0 - row.probability) / static_cast<double>(n));
    if (j == 0 || row.probability > table.sup_probability) {
      table.sup_probability = row.probability;
      table.sup_std_error = row.std_error;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

BoundaryProbe boundary_continuity_probe(const ProblemSpec& spec, std::span<const double> z,
                                        std::span<const double> radii, const SolveOptions& opts) {
  BoundaryProbe probe;
  probe.z.assign(z.begin(), z.end());
  probe.g_at_z = spec.g(z);
  const Point outward = spec.domain.outward_normal(z);
  SolveOptions local = opts;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    ProbeRow row;
    row.r = radii[k];
    row.x.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) row.x[i] = z[i] - radii[k] * outward[i];
    if (!spec.domain.contains(row.x)) throw std::invalid_argument("boundary probe point lies outside D");
    local.first_stream = opts.first_stream + static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(opts.n_paths);
    row.u = solve_point(spec, row.x, local);
    probe.rows.push_back(std::move(row));
  }
  return probe;
}

JumpTail jump_exit_tail(const ExitStatistics& stats, std::span<const double> x0, std::span<const double> edges,
                        double r_from, long min_count) {
  check_edges(edges);
  const std::size_t nb = edges.size() - 1;
  const int d = static_cast<int>(x0.size());
  JumpTail tail;
  tail.edges.assign(edges.begin(), edges.end());
  tail.counts.assign(nb, 0);
  for (const auto& rec : stats.records) {
    if (rec.kind != ExitKind::jump) continue;
    double r2 = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) r2 += (rec.exit_point[i] - x0[i]) * (rec.exit_point[i] - x0[i]);
    const long b = bin_of(edges, std::sqrt(r2));
    if (b >= 0) tail.counts[static_cast<std::size_t>(b)]++;
  }
  const double total = static_cast<double>(stats.records.size());
  tail.density.resize(nb);
  for (std::size_t b = 0; b < nb; ++b)
    tail.density[b] = static_cast<double>(tail.counts[b]) / (total * shell_volume(d, edges[b], edges[b + 1]));
  tail.fit = log_log_tail(tail.edges, tail.density, tail.counts, r_from, min_count);
  return tail;
}

}  // namespace nlfk
