#include "aireml/cli/design.hpp"

#include <algorithm>
#include <map>

namespace aireml::cli {

namespace {

struct Coded {
  std::vector<std::string> levels;
  std::vector<Index> code;  // level index per row
};

Coded code_factor(const Table& table, const std::string& column, const std::string& context) {
  Coded c;
  const auto values = table.strings(column, context);
  c.levels = sorted_levels(values);
  std::map<std::string, Index> index;
  for (size_t k = 0; k < c.levels.size(); ++k) index[c.levels[k]] = static_cast<Index>(k);
  c.code.reserve(values.size());
  for (const auto& v : values) c.code.push_back(index.at(v));
  return c;
}

}  // namespace

std::vector<std::string> sorted_levels(const std::vector<std::string>& values) {
  std::vector<std::string> levels = values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

Design build_design(const Table& table, const RunConfig& config) {
  const Index n = table.num_rows();
  if (n == 0) throw InputError("dataset has no data rows");
  Design d;
  d.spec.scale = config.solver.scale;
  d.dataset.y = table.numbers(config.response, "model.response");

  std::vector<VectorXd> xcols{VectorXd::Ones(n)};
  d.fixed_names.push_back("intercept");
  for (size_t t = 0; t < config.fixed.size(); ++t) {
    const FixedTerm& term = config.fixed[t];
    const std::string key = "model.fixed[" + std::to_string(t) + "]";
    if (term.type == FixedTerm::Type::numeric) {
      xcols.push_back(table.numbers(term.column, key));
      d.fixed_names.push_back(term.column);
      continue;
    }
    const Coded c = code_factor(table, term.column, key);
    for (size_t k = 1; k < c.levels.size(); ++k) {
      VectorXd col = VectorXd::Zero(n);
      for (Index i = 0; i < n; ++i) {
        if (c.code[static_cast<size_t>(i)] == static_cast<Index>(k)) col(i) = 1.0;
      }
      xcols.push_back(std::move(col));
      d.fixed_names.push_back(term.column + ":" + c.levels[k]);
    }
  }
  d.dataset.X.resize(n, static_cast<Index>(xcols.size()));
  for (size_t j = 0; j < xcols.size(); ++j) d.dataset.X.col(static_cast<Index>(j)) = xcols[j];

  std::vector<Coded> groups;
  Index b = 0;
  for (size_t g = 0; g < config.random.size(); ++g) {
    const RandomTerm& term = config.random[g];
    const std::string key = "model.random[" + std::to_string(g) + "].factor";
    groups.push_back(code_factor(table, term.factor, key));
    const Coded& c = groups.back();
    const Index width = static_cast<Index>(c.levels.size());
    RandomGroup group{term.factor, width, std::nullopt};
    if (term.kernel) {
      MatrixXd K = read_matrix_csv(*term.kernel);
      if (K.rows() != width || K.cols() != width) {
        throw InputError("kernel file '" + term.kernel->string() + "' for factor '" + term.factor + "' is " +
                         std::to_string(K.rows()) + "x" + std::to_string(K.cols()) + ", expected " +
                         std::to_string(width) + "x" + std::to_string(width) + " (one row per level of '" +
                         term.factor + "')");
      }
      group.kernel = std::move(K);
    }
    for (const auto& level : c.levels) d.random_names.push_back(term.factor + ":" + level);
    d.spec.groups.push_back(std::move(group));
    b += width;
  }
  d.dataset.Z = MatrixXd::Zero(n, b);
  Index offset = 0;
  for (const Coded& c : groups) {
    for (Index i = 0; i < n; ++i) d.dataset.Z(i, offset + c.code[static_cast<size_t>(i)]) = 1.0;
    offset += static_cast<Index>(c.levels.size());
  }

  if (config.residual.kind == ResidualStructure::Kind::partitioned) {
    const Coded c = code_factor(table, *config.residual.partition, "model.residual.partition");
    std::vector<int> partition(c.code.begin(), c.code.end());
    d.spec.residual =
        ResidualStructure::partitioned(std::move(partition), static_cast<int>(c.levels.size()), c.levels);
  }
  return d;
}

Model build_model(const Table& table, const RunConfig& config) {
  Design d = build_design(table, config);
  return validate(std::move(d.dataset), std::move(d.spec));
}

}  // namespace aireml::cli
