// Command-line front-end: `qscat run --config file.json` executes one
// configured experiment and writes CSV tables plus a manifest.
//
// Exit codes: 0 success, 1 config validation failure, 2 numerical failure,
// 3 acceptance-suite failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qscat/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"1D interface-scattering toolkit"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute a configured experiment");
  std::string config_path, experiment_override, out_override;
  int jobs = 1;
  run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
  run_cmd->add_option("--experiment", experiment_override,
                      "override the experiment named in the config");
  run_cmd->add_option("--out", out_override, "override the output directory");
  run_cmd->add_option("--jobs", jobs, "worker threads for independent points")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  nlohmann::json j;
  try {
    std::ifstream is(config_path);
    if (!is) throw std::invalid_argument("cannot open config file: " + config_path);
    j = nlohmann::json::parse(is);
    if (!experiment_override.empty()) j["experiment"] = experiment_override;
    if (!out_override.empty()) j["out"] = out_override;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  qscat::RunConfig cfg;
  try {
    cfg = qscat::parse_config(j);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    return qscat::run(cfg, jobs);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
}
