#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aireml/solver.hpp"

namespace aireml::cli {

struct FixedTerm {
  enum class Type { numeric, factor };
  std::string column;
  Type type = Type::numeric;
};

struct RandomTerm {
  std::string factor;
  std::optional<std::filesystem::path> kernel;  // resolved against the config directory
};

struct ResidualTerm {
  ResidualStructure::Kind kind = ResidualStructure::Kind::identity;
  std::optional<std::string> partition;
};

struct SolverConfig {
  Variant variant = Variant::ai;
  Scale scale = Scale::natural;
  double tol = 1e-8;
  int max_iter = 100;
  std::optional<Theta> init;  // empty means "auto"
};

struct OutputConfig {
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> trace;
};

/// Only read by `simulate`. theta is expressed on solver.scale.
struct SimulationConfig {
  Index n = 0;
  std::uint64_t seed = 0;
  Theta theta;
  VectorXd tau;  // empty means zero
  std::map<std::string, int> levels;
};

struct CheckConfig {
  Index cap = 1000;
};

struct RunConfig {
  std::string response;
  std::vector<FixedTerm> fixed;
  std::vector<RandomTerm> random;
  ResidualTerm residual;
  SolverConfig solver;
  OutputConfig output;
  std::optional<SimulationConfig> simulation;
  CheckConfig check;
};

/// Parses the JSON text of a config file. Relative paths are resolved against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::string& source = "config");
RunConfig read_config(const std::filesystem::path& path);

SolveOptions solve_options(const RunConfig& config);

}  // namespace aireml::cli
