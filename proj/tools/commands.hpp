#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "nlfk/estimator.hpp"

namespace nlfk::cli {

enum ExitCode : int { ok = 0, config_error = 1, runtime_error = 2, verify_failed = 3 };

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Applies command-line overrides; threads fall back to the config value,
/// then NONLOCAL_FK_THREADS, then the hardware concurrency.
void apply_overrides(RunConfig& cfg, const Overrides& o);

/// Each command writes its artifacts into cfg.output.directory and returns an
/// exit code; ConfigError and other exceptions propagate to run_command.
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_diagnose(const RunConfig& cfg, std::ostream& log);
int cmd_oracle(const RunConfig& cfg, std::ostream& log);

/// Loads the config, dispatches, and maps errors to exit codes (messages go
/// to `err`).
int run_command(const std::string& command, const std::string& config_path, const Overrides& o,
                std::ostream& log, std::ostream& err);

/// Reads a solve CSV (columns x1..xd, u and optionally stderr) onto the
/// interior lattice of spacing h. Throws std::runtime_error when a row is off
/// the lattice or an interior node is missing.
GridFunction read_grid_csv(const std::string& path, const Domain& domain, double h);

void write_grid_csv(std::ostream& os, const std::vector<Point>& points, const std::vector<Estimate>& estimates);

const char* version() noexcept;

}  // namespace nlfk::cli
