#include <iostream>

#include "CLI11.hpp"
#include "aireml/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"aireml: REML variance-component estimation for linear mixed models"};
  app.require_subcommand(1);

  std::string data;
  std::string config;
  std::string out;

  auto* fit = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit->add_option("--data", data, "dataset CSV with a header row")->required();
  fit->add_option("--config", config, "JSON run configuration")->required();

  auto* simulate = app.add_subcommand("simulate", "simulate a dataset from the configured model");
  simulate->add_option("--config", config, "JSON run configuration with a simulation section")->required();
  simulate->add_option("--out", out, "output CSV path")->required();

  auto* check = app.add_subcommand("check", "run the brute-force identity and derivative checks");
  check->add_option("--data", data, "dataset CSV with a header row")->required();
  check->add_option("--config", config, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aireml::cli::kExitInputError;
  }

  if (*fit) return aireml::cli::cmd_fit(data, config, std::cout, std::cerr);
  if (*simulate) return aireml::cli::cmd_simulate(config, out, std::cout, std::cerr);
  return aireml::cli::cmd_check(data, config, std::cout, std::cerr);
}
