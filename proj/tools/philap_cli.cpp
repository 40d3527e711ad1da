// Command-line front end: load a JSON run configuration, validate it, execute
// its experiments, and write the artifacts.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "philap/config.hpp"
#include "philap/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Batch runner for kernel audits, regularized solves, continuation "
      "studies, barrier problems, and comparison checks"};
  std::string config_path;
  app.add_option("config", config_path, "path to the JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  std::string output_override;
  app.add_option("-o,--output", output_override,
                 "override the config's output directory");
  int verbosity = 1;
  app.add_option("--verbosity", verbosity, "0 silent, 1 progress, 2 chatty")
      ->check(CLI::Range(0, 2));
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "same as --verbosity 0");
  bool check_only = false;
  app.add_flag("--check-only", check_only,
               "validate the configured system without solving");
  CLI11_PARSE(app, argc, argv);
  if (quiet) verbosity = 0;

  philap::RunConfig cfg;
  try {
    cfg = philap::load_config(config_path);
  } catch (const philap::Error& e) {
    std::cerr << "[philap] config error: " << e.what() << "\n";
    return 1;
  }
  if (!output_override.empty()) cfg.output_dir = output_override;

  const philap::RunResult result = philap::run(cfg, check_only, verbosity);
  return result.exit_code;
}
