#pragma once

// Strict JSON run configuration for the nonlocal-fk tool. Every object is
// checked against its known keys; anything else is an error naming the full
// key path (e.g. "problem.domain.radus").

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlfk/model.hpp"
#include "nlfk/pathsim.hpp"
#include "nlfk/weakform.hpp"

namespace nlfk::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NumericsConfig {
  PathConfig path;
  long n_paths = 1000;
  double grid_h = 0.05;
  std::vector<Point> points;  // when non-empty, solve at these points instead of the grid
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct BumpConfig {
  Point center;
  double width = 0.0;
};

struct VerifyConfig {
  std::optional<std::string> candidate_file;  // CSV as written by solve
  std::optional<std::string> candidate_expr;  // analytic u on D
  double grid_h = 0.0;                        // 0: numerics.grid_h
  QuadraturePolicy quadrature;  // delta 0: twice the quadrature h
  bool quadrature_h_set = false;  // grid candidates default to the grid spacing
  double tol_c = 1.0;
  std::optional<double> dt;  // default: numerics.dt for grid files, 0 for expressions
  std::vector<BumpConfig> bumps;  // empty: default_bumps
};

struct DensityConfig {
  double t = 0.1;
  Point x0;
  double r_max = 3.0;
  int bins = 60;
  long n_paths = 100000;
  long min_count = 100;
  long heavy_count = 10000;
  double euler_dt = 1e-3;
  bool brownian_control = true;
  double tail_from = 1.0;
};

struct SurvivalConfig {
  Point x0;
  double t_from = 1.0;
  long n_paths = 10000;
  double jump_tail_from = 1.0;
};

struct DisplacementConfig {
  std::vector<double> times{0.1, 0.05, 0.01};
  double r = 0.2;
  std::vector<Point> starts;  // empty: 3^d lattice around the incenter at half the inradius
  double monitor_dt = 1e-3;
  long n_paths = 20000;
};

struct BoundaryConfig {
  Point z;
  std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  long n_paths = 20000;
};

struct KatoConfig {
  std::vector<double> radii{0.5, 0.25, 0.125};
  double lattice_h = 0.05;
};

struct DiagnoseConfig {
  std::optional<DensityConfig> density;
  std::optional<SurvivalConfig> survival;
  std::optional<DisplacementConfig> displacement;
  std::optional<BoundaryConfig> boundary;
  std::optional<KatoConfig> kato;
};

struct OracleConfig {
  long n_paths = 20000;
  double dt = 1e-3;
  double identity_tolerance = 5e-3;  // absolute band added to 3 stderr
  double harmonic_tolerance = 0.02;
  double fractional_tolerance = 0.03;
  long sampler_draws = 200000;
  double sampler_tolerance = 1e-2;
};

struct RunConfig {
  nlohmann::json source;  // the parsed file, echoed into every output
  std::optional<ProblemSpec> problem;
  NumericsConfig numerics;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: NONLOCAL_FK_THREADS, then hardware concurrency
  OutputConfig output;
  std::optional<VerifyConfig> verify;
  std::optional<DiagnoseConfig> diagnose;
  OracleConfig oracle;

  const ProblemSpec& require_problem() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Problem block alone; `path` prefixes error messages.
ProblemSpec parse_problem(const nlohmann::json& j, const std::string& path = "problem");

}  // namespace nlfk::cli
