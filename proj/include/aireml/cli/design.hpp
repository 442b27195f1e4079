#pragma once

#include <string>
#include <vector>

#include "aireml/cli/config.hpp"
#include "aireml/cli/csv.hpp"

namespace aireml::cli {

struct Design {
  Dataset dataset;
  VarianceSpec spec;
  /// "intercept", numeric column names, and "<column>:<level>" for factor indicators.
  std::vector<std::string> fixed_names;
  /// "<factor>:<level>" per column of Z.
  std::vector<std::string> random_names;
};

/// Distinct values sorted by byte-wise string comparison.
std::vector<std::string> sorted_levels(const std::vector<std::string>& values);

/// X: intercept, then each fixed term in config order (numeric as is, factor as
/// indicators of every level but the first). Z: one full indicator block per
/// random term, columns in level order.
Design build_design(const Table& table, const RunConfig& config);

Model build_model(const Table& table, const RunConfig& config);

}  // namespace aireml::cli
