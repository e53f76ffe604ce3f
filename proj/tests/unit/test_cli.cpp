#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"

using namespace nlfk;
using namespace nlfk::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlfk_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json constant_problem() {
  return json::parse(R"({"dim": 2, "domain": {"type": "ball", "center": [0, 0], "radius": 1},
                         "alpha": 1.2, "a": 1, "sigma": 1, "g": 1})");
}

std::string config_error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("unknown keys are reported with their full path") {
  json j{{"problem", constant_problem()}};
  j["problem"]["domain"]["radus"] = 1;
  CHECK(config_error_of(j).find("problem.domain.radus") != std::string::npos);
  json k{{"problem", constant_problem()}, {"numerics", {{"n_path", 10}}}};
  CHECK(config_error_of(k).find("numerics.n_path") != std::string::npos);
  json top{{"problem", constant_problem()}, {"sed", 3}};
  CHECK(config_error_of(top).find("sed") != std::string::npos);
}

TEST_CASE("missing, mistyped and inconsistent fields") {
  json j{{"problem", constant_problem()}};
  j["problem"].erase("dim");
  CHECK(config_error_of(j).find("problem.dim") != std::string::npos);

  j = json{{"problem", constant_problem()}};
  j["problem"]["alpha"] = "fast";
  CHECK_FALSE(config_error_of(j).empty());

  j = json{{"problem", constant_problem()}};
  j["problem"]["alpha"] = 2.5;
  CHECK_FALSE(config_error_of(j).empty());

  j = json{{"problem", constant_problem()}};
  j["problem"]["g"] = "x1";
  CHECK(config_error_of(j).find("g_bound") != std::string::npos);
  j["problem"]["g_bound"] = 1;
  CHECK(config_error_of(j).empty());

  j = json{{"problem", constant_problem()}};
  j["problem"]["f"] = "1 + * x1";
  CHECK_FALSE(config_error_of(j).empty());

  j = json{{"problem", constant_problem()}, {"verify", {{"tol_c", 1}}}};
  CHECK(config_error_of(j).find("candidate") != std::string::npos);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"harmonic", "fractional", "identity", "mixed", "constant", "oracle"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(NLFK_CONFIG_DIR) + "/" + name + ".json"));
  }
}

TEST_CASE("solve on a constant problem, rerun byte-identical, then verify") {
  const fs::path dir = scratch("constant");
  json j{{"problem", constant_problem()},
         {"numerics", {{"dt", 0.02}, {"n_paths", 50}, {"grid_h", 0.25}}},
         {"seed", 5},
         {"output", {{"directory", (dir / "out").string()}}}};
  const std::string cfg = write_config(dir, j);
  std::ostringstream log, err;
  REQUIRE(run_command("solve", cfg, {}, log, err) == ExitCode::ok);
  const std::string first = slurp(dir / "out" / "solution.csv");
  CHECK(first.rfind("x1,x2,u,stderr,n,censored_frac\n", 0) == 0);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["config"]["seed"] == 5);

  const Domain d = Domain::ball({0.0, 0.0}, 1.0);
  const GridFunction g = read_grid_csv((dir / "out" / "solution.csv").string(), d, 0.25);
  for (double v : g.values()) CHECK(v == 1.0);

  Overrides threads;
  threads.threads = 3;
  REQUIRE(run_command("solve", cfg, threads, log, err) == ExitCode::ok);
  CHECK(slurp(dir / "out" / "solution.csv") == first);

  j["verify"] = {{"candidate_file", (dir / "out" / "solution.csv").string()}, {"tol_c", 1}};
  const std::string vcfg = write_config(dir, j);
  CHECK(run_command("verify", vcfg, {}, log, err) == ExitCode::ok);
  CHECK(json::parse(slurp(dir / "out" / "verify_report.json"))["pass"] == true);
}

TEST_CASE("verify rejects a corrupted grid and a mismatched one") {
  const fs::path dir = scratch("corrupt");
  const Domain d = Domain::ball({0.0, 0.0}, 1.0);
  const auto pts = grid_points(d, 0.25);
  {
    std::ofstream out(dir / "bad.csv");
    out << "x1,x2,u\n";
    for (const Point& p : pts) out << p[0] << ',' << p[1] << ',' << (p[0] > 0.0 ? 1.5 : 1.0) << '\n';
  }
  json j{{"problem", constant_problem()},
         {"numerics", {{"dt", 0.02}, {"grid_h", 0.25}}},
         {"verify", {{"candidate_file", (dir / "bad.csv").string()}, {"tol_c", 1}}},
         {"output", {{"directory", (dir / "out").string()}}}};
  std::ostringstream log, err;
  CHECK(run_command("verify", write_config(dir, j), {}, log, err) == ExitCode::verify_failed);

  j["numerics"]["grid_h"] = 0.2;
  CHECK(run_command("verify", write_config(dir, j), {}, log, err) == ExitCode::runtime_error);
}

TEST_CASE("bad config exits with code 1") {
  const fs::path dir = scratch("badcfg");
  std::ofstream(dir / "config.json") << "{\"problem\": ";
  std::ostringstream log, err;
  CHECK(run_command("solve", (dir / "config.json").string(), {}, log, err) == ExitCode::config_error);
  CHECK(run_command("solve", (dir / "missing.json").string(), {}, log, err) == ExitCode::config_error);
}

TEST_CASE("oracle suite flags a coarse time step") {
  const fs::path dir = scratch("oracle");
  json j{{"oracle", {{"n_paths", 4000}, {"dt", 0.1}, {"sampler_draws", 20000}, {"sampler_tolerance", 0.03}}},
         {"seed", 2},
         {"output", {{"directory", (dir / "out").string()}}}};
  std::ostringstream log, err;
  CHECK(run_command("oracle", write_config(dir, j), {}, log, err) == ExitCode::verify_failed);
  const json s = json::parse(slurp(dir / "out" / "oracle_summary.json"));
  bool identity_failed = false;
  for (const auto& e : s["oracles"]) {
    if (e["name"] == "constant_identity") CHECK(e["pass"] == true);
    if (e["name"] == "half_laplacian_pointwise") CHECK(e["pass"] == true);
    if (e["name"] == "feynman_kac_identity") identity_failed = !e["pass"].get<bool>();
  }
  CHECK(identity_failed);
}

TEST_CASE("thread count falls back to the environment") {
  RunConfig cfg = parse_config(json{{"problem", constant_problem()}});
  ::setenv("NONLOCAL_FK_THREADS", "3", 1);
  apply_overrides(cfg, {});
  CHECK(cfg.threads == 3);
  Overrides o;
  o.threads = 2;
  apply_overrides(cfg, o);
  CHECK(cfg.threads == 2);
  ::unsetenv("NONLOCAL_FK_THREADS");
}
