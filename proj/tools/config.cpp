#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nlfk::cli {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects the ones never asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? std::string("config") : "'" + path_ + "'"; }

  bool has(const std::string& key) {
    known_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing key '" + key_path(key) + "'");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("key '" + key_path(key) + "' has the wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("key '" + key_path(key) + "' must be a number");
    return v.get<double>();
  }

  double number(const std::string& key) {
    at(key);
    return number(key, 0.0);
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError("key '" + key_path(key) + "' must be an integer");
    return v.get<long>();
  }

  Point point(const std::string& key, int dim) {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError("key '" + key_path(key) + "' must be an array of numbers");
    Point p;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("key '" + key_path(key) + "' must be an array of numbers");
      p.push_back(e.get<double>());
    }
    if (dim > 0 && p.size() != static_cast<std::size_t>(dim))
      throw ConfigError("key '" + key_path(key) + "' must have " + std::to_string(dim) + " entries");
    return p;
  }

  std::vector<double> numbers(const std::string& key) { return point(key, 0); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!known_.contains(key)) throw ConfigError("unknown key '" + key_path(key) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Expr parse_field(const json& v, const std::string& path, int dim) {
  if (v.is_number()) return constant_field(v.get<double>(), dim);
  if (!v.is_string()) throw ConfigError("key '" + path + "' must be a number or an expression string");
  try {
    return parse_expression(v.get<std::string>(), dim);
  } catch (const ParseError& e) {
    throw ConfigError("key '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + path + "': " + e.what());
  }
}

Point parse_point_value(const json& v, const std::string& path, int dim) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim))
    throw ConfigError("key '" + path + "' must be an array of " + std::to_string(dim) + " numbers");
  Point p;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("key '" + path + "' must contain numbers");
    p.push_back(e.get<double>());
  }
  return p;
}

std::vector<Point> parse_points(Reader& r, const std::string& key, int dim) {
  const json& v = r.at(key);
  if (!v.is_array()) throw ConfigError("key '" + r.key_path(key) + "' must be an array of points");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < v.size(); ++i)
    pts.push_back(parse_point_value(v[i], r.key_path(key) + "[" + std::to_string(i) + "]", dim));
  return pts;
}

Domain parse_domain(const json& j, const std::string& path, int dim) {
  Reader r(j, path);
  const auto type = r.get<std::string>("type");
  try {
    if (type == "ball") {
      const Point c = r.point("center", dim);
      const double radius = r.number("radius");
      r.finish();
      return Domain::ball(c, radius);
    }
    if (type == "box") {
      const Point lo = r.point("lo", dim);
      const Point hi = r.point("hi", dim);
      r.finish();
      return Domain::box(lo, hi);
    }
    if (type == "polytope") {
      const json& hs = r.at("halfspaces");
      if (!hs.is_array()) throw ConfigError("key '" + r.key_path("halfspaces") + "' must be an array");
      std::vector<Halfspace> halfspaces;
      for (std::size_t i = 0; i < hs.size(); ++i) {
        Reader h(hs[i], r.key_path("halfspaces") + "[" + std::to_string(i) + "]");
        Halfspace s;
        s.normal = h.point("normal", dim);
        s.offset = h.number("offset");
        h.finish();
        halfspaces.push_back(std::move(s));
      }
      r.finish();
      return Domain::polytope(std::move(halfspaces));
    }
  } catch (const GeometryError& e) {
    throw ConfigError("key '" + path + "': " + e.what());
  }
  throw ConfigError("key '" + r.key_path("type") + "' must be one of ball, box, polytope");
}

NumericsConfig parse_numerics(const json& j, int dim) {
  Reader r(j, "numerics");
  NumericsConfig n;
  n.path.dt = r.number("dt", n.path.dt);
  n.path.t_max = r.number("t_max", n.path.t_max);
  n.path.hit_tol = r.number("hit_tol", n.path.hit_tol);
  n.path.record_trace = r.get<bool>("record_trace", false);
  n.n_paths = r.integer("n_paths", n.n_paths);
  n.grid_h = r.number("grid_h", n.grid_h);
  if (r.has("points")) {
    if (dim <= 0) throw ConfigError("key 'numerics.points' needs a problem block");
    n.points = parse_points(r, "points", dim);
  }
  r.finish();
  try {
    n.path.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("numerics: ") + e.what());
  }
  if (n.n_paths < 1) throw ConfigError("key 'numerics.n_paths' must be >= 1");
  if (!(n.grid_h > 0.0)) throw ConfigError("key 'numerics.grid_h' must be > 0");
  return n;
}

OutputConfig parse_output(const json& j) {
  Reader r(j, "output");
  OutputConfig o;
  o.directory = r.get<std::string>("directory", o.directory);
  if (r.has("formats")) {
    const auto formats = r.get<std::vector<std::string>>("formats");
    o.csv = o.json = false;
    for (const auto& f : formats) {
      if (f == "csv")
        o.csv = true;
      else if (f == "json")
        o.json = true;
      else
        throw ConfigError("key 'output.formats' accepts only \"csv\" and \"json\"");
    }
  }
  r.finish();
  return o;
}

VerifyConfig parse_verify(const json& j, int dim) {
  Reader r(j, "verify");
  VerifyConfig v;
  if (r.has("candidate_file")) v.candidate_file = r.get<std::string>("candidate_file");
  if (r.has("candidate_expr")) {
    const json& e = r.at("candidate_expr");
    if (!e.is_string()) throw ConfigError("key 'verify.candidate_expr' must be a string");
    v.candidate_expr = e.get<std::string>();
  }
  if (v.candidate_file.has_value() == v.candidate_expr.has_value())
    throw ConfigError("verify needs exactly one of 'verify.candidate_file' and 'verify.candidate_expr'");
  v.grid_h = r.number("grid_h", 0.0);
  v.quadrature_h_set = r.has("quad_h");
  v.quadrature.h = r.number("quad_h", v.quadrature.h);
  v.quadrature.delta = r.number("delta", 0.0);
  v.quadrature.far_radius = r.number("far_radius", 0.0);
  v.quadrature.tail_nodes = static_cast<int>(r.integer("tail_nodes", v.quadrature.tail_nodes));
  v.quadrature.sphere_order = static_cast<int>(r.integer("sphere_order", v.quadrature.sphere_order));
  v.tol_c = r.number("tol_c", v.tol_c);
  if (r.has("dt")) v.dt = r.number("dt");
  if (r.has("bumps")) {
    const json& bs = r.at("bumps");
    if (!bs.is_array()) throw ConfigError("key 'verify.bumps' must be an array");
    for (std::size_t i = 0; i < bs.size(); ++i) {
      Reader b(bs[i], "verify.bumps[" + std::to_string(i) + "]");
      BumpConfig bc;
      bc.center = b.point("center", dim);
      bc.width = b.number("width");
      b.finish();
      v.bumps.push_back(std::move(bc));
    }
  }
  r.finish();
  if (!(v.tol_c > 0.0)) throw ConfigError("key 'verify.tol_c' must be > 0");
  return v;
}

DiagnoseConfig parse_diagnose(const json& j, int dim) {
  Reader r(j, "diagnose");
  DiagnoseConfig d;
  if (r.has("density")) {
    Reader s(r.at("density"), "diagnose.density");
    DensityConfig c;
    c.t = s.number("t", c.t);
    c.x0 = s.point("x0", dim);
    c.r_max = s.number("r_max", c.r_max);
    c.bins = static_cast<int>(s.integer("bins", c.bins));
    c.n_paths = s.integer("n_paths", c.n_paths);
    c.min_count = s.integer("min_count", c.min_count);
    c.heavy_count = s.integer("heavy_count", c.heavy_count);
    c.euler_dt = s.number("euler_dt", c.euler_dt);
    c.brownian_control = s.get<bool>("brownian_control", c.brownian_control);
    c.tail_from = s.number("tail_from", c.tail_from);
    s.finish();
    d.density = c;
  }
  if (r.has("survival")) {
    Reader s(r.at("survival"), "diagnose.survival");
    SurvivalConfig c;
    c.x0 = s.point("x0", dim);
    c.t_from = s.number("t_from", c.t_from);
    c.n_paths = s.integer("n_paths", c.n_paths);
    c.jump_tail_from = s.number("jump_tail_from", c.jump_tail_from);
    s.finish();
    d.survival = c;
  }
  if (r.has("displacement")) {
    Reader s(r.at("displacement"), "diagnose.displacement");
    DisplacementConfig c;
    if (s.has("times")) c.times = s.numbers("times");
    c.r = s.number("r", c.r);
    if (s.has("starts")) c.starts = parse_points(s, "starts", dim);
    c.monitor_dt = s.number("monitor_dt", c.monitor_dt);
    c.n_paths = s.integer("n_paths", c.n_paths);
    s.finish();
    d.displacement = c;
  }
  if (r.has("boundary")) {
    Reader s(r.at("boundary"), "diagnose.boundary");
    BoundaryConfig c;
    c.z = s.point("z", dim);
    if (s.has("radii")) c.radii = s.numbers("radii");
    c.n_paths = s.integer("n_paths", c.n_paths);
    s.finish();
    d.boundary = c;
  }
  if (r.has("kato")) {
    Reader s(r.at("kato"), "diagnose.kato");
    KatoConfig c;
    if (s.has("radii")) c.radii = s.numbers("radii");
    c.lattice_h = s.number("lattice_h", c.lattice_h);
    s.finish();
    d.kato = c;
  }
  r.finish();
  return d;
}

OracleConfig parse_oracle(const json& j) {
  Reader r(j, "oracle");
  OracleConfig o;
  o.n_paths = r.integer("n_paths", o.n_paths);
  o.dt = r.number("dt", o.dt);
  o.identity_tolerance = r.number("identity_tolerance", o.identity_tolerance);
  o.harmonic_tolerance = r.number("harmonic_tolerance", o.harmonic_tolerance);
  o.fractional_tolerance = r.number("fractional_tolerance", o.fractional_tolerance);
  o.sampler_draws = r.integer("sampler_draws", o.sampler_draws);
  o.sampler_tolerance = r.number("sampler_tolerance", o.sampler_tolerance);
  r.finish();
  if (o.n_paths < 2) throw ConfigError("key 'oracle.n_paths' must be >= 2");
  if (!(o.dt > 0.0)) throw ConfigError("key 'oracle.dt' must be > 0");
  return o;
}

}  // namespace

ProblemSpec parse_problem(const json& j, const std::string& path) {
  Reader r(j, path);
  const long dim = r.integer("dim", 0);
  if (dim < 1 || dim > 3) throw ConfigError("key '" + r.key_path("dim") + "' must be 1, 2 or 3");
  const int d = static_cast<int>(dim);
  ProblemSpec spec(parse_domain(r.at("domain"), r.key_path("domain"), d));
  spec.dim = d;
  spec.alpha = r.number("alpha", spec.alpha);
  spec.a = r.number("a", spec.a);
  spec.sigma = static_cast<int>(r.integer("sigma", spec.sigma));
  if (r.has("b")) {
    const json& b = r.at("b");
    if (!b.is_array() || b.size() != static_cast<std::size_t>(d))
      throw ConfigError("key '" + r.key_path("b") + "' must be an array of " + std::to_string(d) + " fields");
    spec.drift.clear();
    for (std::size_t i = 0; i < b.size(); ++i)
      spec.drift.push_back(parse_field(b[i], r.key_path("b") + "[" + std::to_string(i) + "]", d));
  } else {
    spec.drift.assign(static_cast<std::size_t>(d), constant_field(0.0, d));
  }
  spec.c = r.has("c") ? parse_field(r.at("c"), r.key_path("c"), d) : constant_field(0.0, d);
  spec.f = r.has("f") ? parse_field(r.at("f"), r.key_path("f"), d) : constant_field(0.0, d);
  spec.g = r.has("g") ? parse_field(r.at("g"), r.key_path("g"), d) : constant_field(1.0, d);
  if (!spec.g.is_constant() && !r.has("g_bound"))
    throw ConfigError("key '" + r.key_path("g_bound") + "' is required when g is not constant");
  spec.g_bound = r.number("g_bound", spec.g.is_constant() ? std::fabs(spec.g.constant_value()) : 0.0);
  spec.kato_warn_threshold = r.number("kato_warn_threshold", spec.kato_warn_threshold);
  spec.norm_p = r.number("norm_p", spec.norm_p);
  r.finish();
  try {
    spec.check();
  } catch (const SpecError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

const ProblemSpec& RunConfig::require_problem() const {
  if (!problem) throw ConfigError("missing key 'problem'");
  return *problem;
}

RunConfig parse_config(const json& j) {
  Reader r(j, "");
  RunConfig cfg;
  cfg.source = j;
  int dim = 0;
  if (r.has("problem")) {
    cfg.problem = parse_problem(r.at("problem"));
    dim = cfg.problem->dim;
  }
  if (r.has("numerics")) cfg.numerics = parse_numerics(r.at("numerics"), dim);
  if (r.has("seed")) {
    const json& s = r.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("key 'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.threads = static_cast<int>(r.integer("threads", 0));
  if (cfg.threads < 0) throw ConfigError("key 'threads' must be >= 0");
  if (r.has("output")) cfg.output = parse_output(r.at("output"));
  if (r.has("verify")) {
    if (dim == 0) throw ConfigError("key 'verify' needs a problem block");
    cfg.verify = parse_verify(r.at("verify"), dim);
  }
  if (r.has("diagnose")) {
    if (dim == 0) throw ConfigError("key 'diagnose' needs a problem block");
    cfg.diagnose = parse_diagnose(r.at("diagnose"), dim);
  }
  if (r.has("oracle")) cfg.oracle = parse_oracle(r.at("oracle"));
  r.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace nlfk::cli
