#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sawqed/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Transmon / SAW phonon scattering simulator"};
  app.set_version_flag("--version", std::string(SAWQED_VERSION));
  app.require_subcommand(1);

  sawqed::cli::RunRequest req;
  std::uint64_t seed = 0;
  std::string out;
  auto* run = app.add_subcommand("run", "Run one scenario and write CSV outputs plus manifest.json");
  run->add_option("--config", req.config_path, "Device configuration JSON")->required();
  run->add_option("--scenario", req.scenario_path, "Scenario JSON")->required();
  auto* out_opt = run->add_option("--out", out, "Output directory (overrides the scenario)");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed for stochastic scenarios");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a device configuration");
  validate->add_option("--config", validate_path, "Device configuration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sawqed::cli::kValidation;
  }

  if (*run) {
    if (*out_opt) req.out_dir = out;
    if (*seed_opt) req.seed = seed;
    return sawqed::cli::run(req);
  }
  return sawqed::cli::validate_config(validate_path);
}
