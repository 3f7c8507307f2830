#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ptctk/registry.hpp"
#include "ptctk/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed-time controller synthesis and simulation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario config");
  std::string config_path;
  std::string output_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  run->add_option("config", config_path, "Scenario JSON file")->required();
  run->add_option("--output-dir", output_dir,
                  "Output directory (default: $PTCTK_OUTPUT_DIR or .)");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the disturbance sweep seed");
  run->add_option("--mode", mode,
                  "Override the mode: prescribed, associated, equivalence, "
                  "validate_maps");

  auto* list = app.add_subcommand("list", "List registered components");
  bool as_json = false;
  list->add_flag("--json", as_json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ptctk::kExitConfigError;
  }

  if (*list) {
    const auto& reg = ptctk::Registry::instance();
    std::cout << (as_json ? reg.list_json() + "\n" : reg.list_text());
    return 0;
  }

  ptctk::RunOptions options;
  if (!output_dir.empty()) {
    options.output_dir = output_dir;
  } else if (const char* env = std::getenv("PTCTK_OUTPUT_DIR"); env && *env) {
    options.output_dir = env;
  }
  options.jobs = jobs;
  options.seed = seed;

  try {
    if (mode) options.mode = ptctk::parse_mode(*mode);
    auto config = ptctk::load_config(config_path);
    const auto outcome = ptctk::run_scenario(std::move(config), options, std::cerr);
    std::cout << "summary: " << outcome.summary_path << "\n";
    return outcome.exit_code;
  } catch (const ptctk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ptctk::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ptctk::kExitRuntimeError;
  }
}
