#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "nlfk/sampler.hpp"
#include "nlfk/weakform.hpp"

#ifndef NLFK_VERSION
#define NLFK_VERSION "0.0.0"
#endif

namespace nlfk::cli {

using nlohmann::json;

const char* version() noexcept { return NLFK_VERSION; }

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output.directory);
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

void write_json(const std::filesystem::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

json echo(const RunConfig& cfg) {
  json j = cfg.source;
  j["seed"] = cfg.seed;
  return j;
}

json header(const RunConfig& cfg, const char* command) {
  return json{{"command", command}, {"version", version()}, {"config", echo(cfg)}, {"threads", cfg.threads}};
}

SolveOptions solve_options(const RunConfig& cfg, long n_paths) {
  SolveOptions o;
  o.n_paths = n_paths;
  o.path = cfg.numerics.path;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  return o;
}

json warnings_json(const ProblemSpec& spec, std::ostream& log) {
  json arr = json::array();
  for (const auto& w : validate_spec(spec)) {
    log << "warning [" << w.code << "]: " << w.message << '\n';
    arr.push_back({{"code", w.code}, {"message", w.message}, {"value", w.value}});
  }
  return arr;
}

json estimate_json(const Estimate& e) {
  return {{"u", e.mean},
          {"stderr", e.std_error},
          {"n", e.n_paths},
          {"censored_fraction", e.censored_fraction()},
          {"poisoned", e.n_poisoned}};
}

std::vector<Point> default_starts(const Domain& dom) {
  const int d = dom.dim();
  const double s = 0.5 * dom.inradius();
  std::vector<Point> starts;
  long count = 1;
  for (int i = 0; i < d; ++i) count *= 3;
  for (long k = 0; k < count; ++k) {
    Point p = dom.incenter();
    long rem = k;
    for (int i = d - 1; i >= 0; --i) {
      p[static_cast<std::size_t>(i)] += s * static_cast<double>(rem % 3 - 1);
      rem /= 3;
    }
    starts.push_back(p);
  }
  return starts;
}

}  // namespace

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.out_dir) cfg.output.directory = *o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *o.threads;
  }
  cfg.threads = resolve_threads(cfg.threads);
}

void write_grid_csv(std::ostream& os, const std::vector<Point>& points, const std::vector<Estimate>& estimates) {
  const std::size_t d = points.empty() ? 0 : points.front().size();
  for (std::size_t i = 0; i < d; ++i) os << 'x' << i + 1 << ',';
  os << "u,stderr,n,censored_frac\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (double v : points[k]) os << fmt(v) << ',';
    const Estimate& e = estimates[k];
    os << fmt(e.mean) << ',' << fmt(e.std_error) << ',' << e.n_paths << ',' << fmt(e.censored_fraction()) << '\n';
  }
}

GridFunction read_grid_csv(const std::string& path, const Domain& domain, double h) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file '" + path + "'");
  const std::size_t d = static_cast<std::size_t>(domain.dim());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("grid file '" + path + "' is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  auto column = [&](const std::string& name) -> long {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<long>(i);
    return -1;
  };
  std::vector<long> xcol(d);
  for (std::size_t i = 0; i < d; ++i) {
    xcol[i] = column("x" + std::to_string(i + 1));
    if (xcol[i] < 0) throw std::runtime_error("grid file lacks column x" + std::to_string(i + 1));
  }
  if (column("x" + std::to_string(d + 1)) >= 0) throw std::runtime_error("grid file dimension does not match the domain");
  const long ucol = column("u");
  const long scol = column("stderr");
  if (ucol < 0) throw std::runtime_error("grid file lacks column u");

  GridFunction gf(domain, h);
  gf.values().assign(gf.size(), std::numeric_limits<double>::quiet_NaN());
  if (scol >= 0) gf.std_errors().assign(gf.size(), 0.0);
  std::vector<char> seen(gf.size(), 0);
  const Lattice& lat = gf.lattice();
  std::vector<long> k(d);
  std::vector<double> row;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    row.clear();
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc()) throw std::runtime_error("grid file line " + std::to_string(lineno) + ": bad number");
      row.push_back(v);
    }
    if (row.size() != cols.size())
      throw std::runtime_error("grid file line " + std::to_string(lineno) + ": wrong column count");
    for (std::size_t i = 0; i < d; ++i) {
      const double x = row[static_cast<std::size_t>(xcol[i])];
      const double t = (x - lat.anchor[i]) / h;
      k[i] = std::lround(t);
      if (std::fabs(t - static_cast<double>(k[i])) > 1e-6)
        throw std::runtime_error("grid file line " + std::to_string(lineno) + ": point is off the h-lattice");
    }
    const long s = gf.slot(k);
    if (s < 0) throw std::runtime_error("grid file line " + std::to_string(lineno) + ": point is not inside D");
    const auto slot = static_cast<std::size_t>(s);
    gf.values()[slot] = row[static_cast<std::size_t>(ucol)];
    if (scol >= 0) gf.std_errors()[slot] = row[static_cast<std::size_t>(scol)];
    seen[slot] = 1;
  }
  std::size_t missing = 0;
  for (char s : seen) missing += s == 0;
  if (missing > 0)
    throw std::runtime_error("grid file does not match the domain lattice: " + std::to_string(missing) +
                             " interior nodes missing");
  return gf;
}

// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec& spec = cfg.require_problem();
  json summary = header(cfg, "solve");
  summary["warnings"] = warnings_json(spec, log);
  const auto dir = out_dir(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Point> points;
  std::vector<Estimate> estimates;
  const long n = cfg.numerics.n_paths;
  if (!cfg.numerics.points.empty()) {
    points = cfg.numerics.points;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!spec.domain.contains(points[k])) throw std::runtime_error("solve point " + std::to_string(k) + " is not inside D");
      SolveOptions o = solve_options(cfg, n);
      o.first_stream = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n);
      estimates.push_back(solve_point(spec, points[k], o));
    }
  } else {
    GridSolution sol = solve_grid(spec, cfg.numerics.grid_h, solve_options(cfg, n));
    points = sol.u.points();
    estimates = std::move(sol.estimates);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (cfg.output.csv) {
    auto os = open_out(dir / "solution.csv");
    write_grid_csv(os, points, estimates);
  }
  if (cfg.numerics.path.record_trace && !points.empty()) {
    PathConfig pc = cfg.numerics.path;
    RngStream rng(cfg.seed, 0);
    const ExitRecord rec = simulate_exit(spec, points.front(), pc, rng);
    auto os = open_out(dir / "trace.csv");
    write_trace_csv(os, rec, spec.dim);
  }

  double max_se = 0.0, max_cens = 0.0;
  long poisoned = 0;
  for (const auto& e : estimates) {
    max_se = std::max(max_se, e.std_error);
    max_cens = std::max(max_cens, e.censored_fraction());
    poisoned += e.n_poisoned;
  }
  json results{{"mode", cfg.numerics.points.empty() ? "grid" : "points"},
               {"n_points", points.size()},
               {"paths_per_point", n},
               {"max_stderr", max_se},
               {"max_censored_fraction", max_cens},
               {"poisoned", poisoned},
               {"wallclock", wall}};
  if (!cfg.numerics.points.empty()) {
    json arr = json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
      json e = estimate_json(estimates[k]);
      e["x"] = points[k];
      arr.push_back(std::move(e));
    }
    results["points"] = std::move(arr);
  } else {
    results["grid_h"] = cfg.numerics.grid_h;
  }
  summary["results"] = std::move(results);
  if (cfg.output.json) write_json(dir / "summary.json", summary);
  log << "solve: " << points.size() << " points, " << n << " paths each, " << fmt(wall) << " s\n";
  return ExitCode::ok;
}

// ---------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec& spec = cfg.require_problem();
  if (!cfg.verify) throw ConfigError("missing key 'verify'");
  const VerifyConfig& v = *cfg.verify;

  QuadraturePolicy q = v.quadrature;
  const double grid_h = v.grid_h > 0.0 ? v.grid_h : cfg.numerics.grid_h;
  if (v.candidate_file && !v.quadrature_h_set) q.h = grid_h;
  if (q.delta == 0.0) q.delta = 2.0 * q.h;
  try {
    q.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("verify: ") + e.what());
  }

  std::vector<TestFunction> bumps;
  try {
    if (v.bumps.empty()) {
      bumps = default_bumps(spec.domain);
    } else {
      for (const auto& b : v.bumps) bumps.emplace_back(spec.domain, b.center, b.width);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("verify.bumps: ") + e.what());
  }

  VerifyReport rep;
  json candidate;
  if (v.candidate_file) {
    if (std::fabs(q.h - grid_h) > 1e-12 * grid_h)
      throw ConfigError("verify: quad_h must equal the grid spacing for grid candidates");
    const GridFunction u = read_grid_csv(*v.candidate_file, spec.domain, grid_h);
    rep = verify_solution(u, spec, bumps, q, v.tol_c, v.dt.value_or(cfg.numerics.path.dt));
    candidate = {{"file", *v.candidate_file}, {"grid_h", grid_h}};
  } else {
    Expr u;
    try {
      u = parse_expression(*v.candidate_expr, spec.dim);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("key 'verify.candidate_expr': ") + e.what());
    }
    rep = verify_solution(u, spec, bumps, q, v.tol_c, v.dt.value_or(0.0));
    candidate = {{"expr", u.to_string()}};
  }

  json report = header(cfg, "verify");
  report["candidate"] = candidate;
  report["quadrature"] = {{"h", q.h}, {"delta", q.delta}, {"far_radius", q.far_radius},
                          {"tail_nodes", q.tail_nodes}, {"sphere_order", q.sphere_order}};
  json arr = json::array();
  for (const auto& b : rep.bumps) {
    arr.push_back({{"center", b.center},
                   {"width", b.width},
                   {"residual", b.residual},
                   {"norm", b.norm},
                   {"normalized", b.normalized},
                   {"sigma", b.sigma},
                   {"threshold", b.threshold},
                   {"pass", b.pass},
                   {"terms",
                    {{"gradient", b.terms.gradient},
                     {"fractional_near", b.terms.fractional_near},
                     {"fractional_mid", b.terms.fractional_mid},
                     {"fractional_far", b.terms.fractional_far},
                     {"drift", b.terms.drift},
                     {"potential", b.terms.potential},
                     {"source", b.terms.source}}}});
  }
  report["bumps"] = std::move(arr);
  report["h"] = rep.h;
  report["dt"] = rep.dt;
  report["tol_c"] = rep.tol_c;
  report["stderr_norm"] = rep.stderr_norm;
  report["max_normalized"] = rep.max_normalized;
  report["measured_c"] = rep.measured_c;
  report["pass"] = rep.pass;
  write_json(out_dir(cfg) / "verify_report.json", report);
  log << "verify: " << (rep.pass ? "pass" : "FAIL") << ", max normalized residual " << fmt(rep.max_normalized)
      << ", measured C " << fmt(rep.measured_c) << '\n';
  return rep.pass ? ExitCode::ok : ExitCode::verify_failed;
}

// ---------------------------------------------------------------------------

int cmd_diagnose(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec& spec = cfg.require_problem();
  if (!cfg.diagnose) throw ConfigError("missing key 'diagnose'");
  const DiagnoseConfig& dg = *cfg.diagnose;
  const auto dir = out_dir(cfg);
  json report = header(cfg, "diagnose");
  report["warnings"] = warnings_json(spec, log);
  std::uint64_t stream = 0;  // disjoint stream blocks per diagnostic

  if (dg.density) {
    const DensityConfig& c = *dg.density;
    std::vector<double> edges;
    for (int i = 0; i <= c.bins; ++i) edges.push_back(c.r_max * i / c.bins);
    SolveOptions o = solve_options(cfg, c.n_paths);
    o.first_stream = stream;
    stream += static_cast<std::uint64_t>(c.n_paths);
    const DensityReport rep = empirical_density(spec, c.t, c.x0, edges, o, c.min_count, c.euler_dt);
    json dj{{"t", rep.t},           {"n_samples", rep.n_samples}, {"c1", rep.c1},
            {"c2", rep.c2},         {"c3", rep.c3},               {"c4", rep.c4},
            {"qualifying_bins", rep.qualifying_bins}, {"violations", rep.violations},
            {"envelope_pass", rep.qualifying_bins > 0 && rep.violations == 0}};
    try {
      const LinearFit tail = log_log_tail(rep.edges, rep.density, rep.counts, c.tail_from, c.min_count);
      dj["tail_slope"] = tail.slope;
      dj["tail_expected_slope"] = -(spec.dim + spec.alpha);
    } catch (const std::invalid_argument&) {
      dj["tail_slope"] = nullptr;
    }
    std::vector<long> bm_counts;
    std::vector<double> bm_density;
    if (c.brownian_control) {
      ProblemSpec bm = spec;
      bm.a = 0.0;
      bm.sigma = 1;
      bm.drift.assign(static_cast<std::size_t>(bm.dim), constant_field(0.0, bm.dim));
      o.first_stream = stream;
      stream += static_cast<std::uint64_t>(c.n_paths);
      const DensityReport ctl = empirical_density(bm, c.t, c.x0, edges, o, c.min_count, c.euler_dt);
      bm_counts = ctl.counts;
      bm_density = ctl.density;
      double worst = 0.0;
      long heavy = 0;
      for (std::size_t i = 0; i < ctl.counts.size(); ++i) {
        if (ctl.counts[i] < c.heavy_count) continue;
        ++heavy;
        const double ref = brownian_shell_density(spec.dim, c.t, edges[i], edges[i + 1]);
        worst = std::max(worst, std::fabs(ctl.density[i] / ref - 1.0));
      }
      dj["brownian_control"] = {{"heavy_bins", heavy},
                                {"max_relative_error", worst},
                                {"pass", heavy > 0 && worst <= 0.05}};
    }
    report["density"] = std::move(dj);
    if (cfg.output.csv) {
      auto os = open_out(dir / "density.csv");
      os << "r0,r1,count,density,lower,upper";
      if (c.brownian_control) os << ",bm_count,bm_density,bm_reference";
      os << '\n';
      for (std::size_t i = 0; i < rep.counts.size(); ++i) {
        os << fmt(edges[i]) << ',' << fmt(edges[i + 1]) << ',' << rep.counts[i] << ',' << fmt(rep.density[i]) << ','
           << fmt(rep.lower[i]) << ',' << fmt(rep.upper[i]);
        if (c.brownian_control)
          os << ',' << bm_counts[i] << ',' << fmt(bm_density[i]) << ','
             << fmt(brownian_shell_density(spec.dim, c.t, edges[i], edges[i + 1]));
        os << '\n';
      }
    }
  }

  if (dg.survival) {
    const SurvivalConfig& c = *dg.survival;
    SolveOptions o = solve_options(cfg, c.n_paths);
    o.first_stream = stream;
    stream += static_cast<std::uint64_t>(c.n_paths);
    const ExitStatistics st = exit_statistics(spec, c.x0, o, c.t_from);
    json sj{{"n_paths", c.n_paths},
            {"n_continuous", st.n_continuous},
            {"n_jump", st.n_jump},
            {"n_censored", st.n_censored},
            {"n_poisoned", st.n_poisoned},
            {"censored_fraction", static_cast<double>(st.n_censored) / static_cast<double>(c.n_paths)},
            {"t_max", cfg.numerics.path.t_max},
            {"xi", estimate_json(st.xi)},
            {"fit_valid", st.survival.valid}};
    if (st.survival.valid) {
      sj["decay_rate"] = st.survival.decay_rate;
      sj["r2"] = st.survival.fit.r2;
      sj["suggested_t_max"] = st.survival.decay_rate > 0.0 ? 20.0 / st.survival.decay_rate : 0.0;
    }
    if (spec.a > 0.0 && st.n_jump > 0) {
      std::vector<double> edges;
      for (int i = 0; i <= 40; ++i) edges.push_back(spec.domain.diameter() * std::pow(10.0, 2.0 * i / 40.0) / 10.0);
      try {
        const JumpTail jt = jump_exit_tail(st, c.x0, edges, c.jump_tail_from);
        sj["jump_tail_slope"] = jt.fit.slope;
        sj["jump_tail_expected_slope"] = -(spec.dim + spec.alpha);
      } catch (const std::invalid_argument&) {
        sj["jump_tail_slope"] = nullptr;
      }
    }
    report["survival"] = std::move(sj);
    if (cfg.output.csv) {
      auto os = open_out(dir / "exit_times.csv");
      os << "tau,kind\n";
      for (const auto& r : st.records) os << fmt(r.tau) << ',' << to_string(r.kind) << '\n';
      auto ss = open_out(dir / "survival.csv");
      ss << "t,log_survival\n";
      for (std::size_t i = 0; i < st.survival.times.size(); ++i)
        ss << fmt(st.survival.times[i]) << ',' << fmt(st.survival.log_survival[i]) << '\n';
    }
  }

  if (dg.displacement) {
    const DisplacementConfig& c = *dg.displacement;
    const std::vector<Point> starts = c.starts.empty() ? default_starts(spec.domain) : c.starts;
    json rows = json::array();
    std::vector<DisplacementTable> tables;
    for (double t : c.times) {
      SolveOptions o = solve_options(cfg, c.n_paths);
      o.first_stream = stream;
      stream += static_cast<std::uint64_t>(c.n_paths) * starts.size();
      tables.push_back(displacement_probability(spec, starts, t, c.r, c.monitor_dt, o));
      rows.push_back({{"t", t},
                      {"sup_probability", tables.back().sup_probability},
                      {"sup_stderr", tables.back().sup_std_error}});
    }
    bool decreasing = tables.size() >= 2;
    for (std::size_t i = 1; i < tables.size(); ++i) {
      const auto& a = tables[i - 1];
      const auto& b = tables[i];
      const double band = 3.0 * std::hypot(a.sup_std_error, b.sup_std_error);
      if (c.times[i] < c.times[i - 1])
        decreasing = decreasing && a.sup_probability - b.sup_probability > band;
      else
        decreasing = decreasing && b.sup_probability - a.sup_probability > band;
    }
    report["displacement"] = {{"r", c.r}, {"rows", rows}, {"monotone", decreasing}};
    if (cfg.output.csv) {
      auto os = open_out(dir / "displacement.csv");
      os << "t,";
      for (int i = 0; i < spec.dim; ++i) os << 'x' << i + 1 << ',';
      os << "probability,stderr\n";
      for (const auto& tab : tables)
        for (const auto& r : tab.rows) {
          os << fmt(tab.t) << ',';
          for (double v : r.start) os << fmt(v) << ',';
          os << fmt(r.probability) << ',' << fmt(r.std_error) << '\n';
        }
    }
  }

  if (dg.boundary) {
    const BoundaryConfig& c = *dg.boundary;
    SolveOptions o = solve_options(cfg, c.n_paths);
    o.first_stream = stream;
    stream += static_cast<std::uint64_t>(c.n_paths) * c.radii.size();
    const BoundaryProbe probe = boundary_continuity_probe(spec, c.z, c.radii, o);
    json rows = json::array();
    for (const auto& r : probe.rows) rows.push_back({{"r", r.r}, {"x", r.x}, {"estimate", estimate_json(r.u)}});
    report["boundary"] = {{"z", probe.z}, {"g_at_z", probe.g_at_z}, {"rows", rows}};
    if (cfg.output.csv) {
      auto os = open_out(dir / "boundary.csv");
      os << "r,";
      for (int i = 0; i < spec.dim; ++i) os << 'x' << i + 1 << ',';
      os << "u,stderr,g_at_z\n";
      for (const auto& r : probe.rows) {
        os << fmt(r.r) << ',';
        for (double v : r.x) os << fmt(v) << ',';
        os << fmt(r.u.mean) << ',' << fmt(r.u.std_error) << ',' << fmt(probe.g_at_z) << '\n';
      }
    }
  }

  if (dg.kato) {
    const KatoConfig& c = *dg.kato;
    json fields = json::object();
    std::vector<std::pair<std::string, const Expr*>> named{{"c", &spec.c}};
    for (std::size_t i = 0; i < spec.drift.size(); ++i) named.emplace_back("b" + std::to_string(i + 1), &spec.drift[i]);
    std::ofstream os;
    if (cfg.output.csv) {
      os = open_out(dir / "kato.csv");
      os << "field,r,value\n";
    }
    for (const auto& [name, field] : named) {
      const KatoProfile prof = kato_profile(*field, spec.domain, c.radii, c.lattice_h);
      fields[name] = {{"radii", prof.radii}, {"values", prof.values}};
      if (os.is_open())
        for (std::size_t i = 0; i < prof.radii.size(); ++i)
          os << name << ',' << fmt(prof.radii[i]) << ',' << fmt(prof.values[i]) << '\n';
    }
    report["kato"] = std::move(fields);
  }

  if (cfg.output.json) write_json(dir / "diagnose.json", report);
  log << "diagnose: wrote " << dir.string() << '\n';
  return ExitCode::ok;
}

// ---------------------------------------------------------------------------

int cmd_oracle(const RunConfig& cfg, std::ostream& log) {
  const OracleConfig& oc = cfg.oracle;
  json entries = json::array();
  bool all = true;
  auto record = [&](const std::string& name, double measured, double reference, double tolerance, json extra = {}) {
    const double err = std::fabs(measured - reference);
    const bool pass = std::isfinite(measured) && err <= tolerance;
    all = all && pass;
    json e{{"name", name}, {"measured", measured}, {"reference", reference},
           {"error", err},  {"tolerance", tolerance}, {"pass", pass}};
    if (!extra.is_null()) e["details"] = std::move(extra);
    entries.push_back(std::move(e));
    log << (pass ? "PASS " : "FAIL ") << name << ": measured " << fmt(measured) << ", reference " << fmt(reference)
        << ", tolerance " << fmt(tolerance) << '\n';
  };

  SolveOptions o;
  o.n_paths = oc.n_paths;
  o.path.dt = oc.dt;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  const Point origin2{0.0, 0.0};

  {
    ProblemSpec s(Domain::ball(origin2, 1.0));
    const Estimate e = solve_point(s, origin2, o);
    record("constant_identity", e.mean, 1.0, 0.0, {{"stderr", e.std_error}});
  }
  {
    ProblemSpec s(Domain::ball(origin2, 1.0));
    s.c = constant_field(-1.0, 2);
    s.f = constant_field(1.0, 2);
    const Estimate e = solve_point(s, origin2, o);
    record("feynman_kac_identity", e.mean, 1.0, 3.0 * e.std_error + oc.identity_tolerance, {{"stderr", e.std_error}});
  }
  {
    ProblemSpec s(Domain::ball(origin2, 1.0));
    s.a = 0.0;
    s.g = parse_expression("x1", 2);
    s.g_bound = 1.0;
    const Point x{0.3, 0.0};
    const Estimate e = solve_point(s, x, o);
    record("harmonic_x1", e.mean, 0.3, 3.0 * e.std_error + oc.harmonic_tolerance, {{"stderr", e.std_error}});
  }
  {
    auto u = [](std::span<const double> x) { return std::fabs(x[0]) < 1.0 ? std::sqrt(1.0 - x[0] * x[0]) : 0.0; };
    const double x0[] = {0.0};
    const double breaks[] = {1.0};
    record("half_laplacian_pointwise", fractional_laplacian_at(u, x0, 1.0, breaks), -1.0, 1e-2);
  }
  {
    ProblemSpec s(Domain::ball({0.0}, 1.0));
    s.sigma = 0;
    s.a = 1.0;
    s.alpha = 1.0;
    s.f = constant_field(1.0, 1);
    s.g = constant_field(0.0, 1);
    s.g_bound = 0.0;
    const Estimate e = solve_point(s, Point{0.0}, o);
    record("fractional_exit_time", e.mean, 1.0, 3.0 * e.std_error + oc.fractional_tolerance, {{"stderr", e.std_error}});
  }
  {
    RngStream rng(cfg.seed, 1ULL << 62);
    const double freqs[] = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
    std::vector<double> draws(static_cast<std::size_t>(oc.sampler_draws));
    for (auto& v : draws) v = stable_increment(rng, 1.0, 1.0, 1.0, 1)[0];
    double worst = 0.0;
    for (double xi : freqs) {
      double re = 0.0;
      for (double v : draws) re += std::cos(xi * v);
      re /= static_cast<double>(draws.size());
      worst = std::max(worst, std::fabs(re - std::exp(-std::fabs(xi))));
    }
    record("stable_characteristic_function", worst, 0.0, oc.sampler_tolerance);
  }

  json summary = header(cfg, "oracle");
  summary["oracles"] = std::move(entries);
  summary["pass"] = all;
  write_json(out_dir(cfg) / "oracle_summary.json", summary);
  return all ? ExitCode::ok : ExitCode::verify_failed;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& command, const std::string& config_path, const Overrides& o, std::ostream& log,
                std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  try {
    if (command == "solve") return cmd_solve(cfg, log);
    if (command == "verify") return cmd_verify(cfg, log);
    if (command == "diagnose") return cmd_diagnose(cfg, log);
    if (command == "oracle") return cmd_oracle(cfg, log);
    err << "unknown command '" << command << "'\n";
    return ExitCode::config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::runtime_error;
  }
}

}  // namespace nlfk::cli
