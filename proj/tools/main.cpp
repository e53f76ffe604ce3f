#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace nlfk::cli;
  CLI::App app{"Monte Carlo solver and weak-form verifier for nonlocal Dirichlet problems"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1, 1);

  std::string config;
  Overrides o;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "estimate u at points or on the interior grid"},
      {"verify", "check a candidate u against the weak form"},
      {"diagnose", "process diagnostics: density, exit times, displacement, boundary, Kato"},
      {"oracle", "closed-form checks of the solver and sampler"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", o.seed, "RNG seed (overrides seed)");
    sub->add_option("--threads", o.threads, "worker threads (fallback: NONLOCAL_FK_THREADS)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ExitCode::ok : ExitCode::config_error;
  }
  return run_command(app.get_subcommands().front()->get_name(), config, o, std::cout, std::cerr);
}
