#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fissura/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field fracture scenario runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run the scenario described by a configuration file");
  run->add_option("config", config_path, "INI configuration file")->required();
  run->add_option("--override", overrides, "Override a setting, section.key=value (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
  run->add_flag("--quiet", quiet, "Do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  fissura::ScenarioConfig config;
  try {
    config = fissura::parse_config_file(config_path, overrides);
  } catch (const fissura::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const fissura::ScenarioOutcome out = fissura::run_scenario(config);
    if (!quiet) std::cout << out.summary;
    if (out.exit_code != kExitOk)
      std::cerr << "solver did not converge; see " << (config.output_dir / "summary.txt").string() << "\n";
    return out.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
