#include "aireml/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <set>

#include "aireml/cli/config.hpp"
#include "aireml/cli/design.hpp"
#include "aireml/cli/report_io.hpp"
#include "aireml/oracle.hpp"
#include "aireml/simulate.hpp"
#include "aireml/solver.hpp"

namespace aireml::cli {

namespace {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitInputError;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

std::string level_label(const std::string& column, int index, int count) {
  const int width = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, index);
  return column + "_" + buf;
}

int level_count(const SimulationConfig& sim, const std::string& column, const std::string& key) {
  const auto it = sim.levels.find(column);
  if (it == sim.levels.end()) {
    throw InputError("simulation.levels has no entry for factor column '" + column + "' used by " + key);
  }
  return it->second;
}

}  // namespace

int cmd_fit(const std::filesystem::path& data_path, const std::filesystem::path& config_path, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = read_config(config_path);
    const Table table = read_csv(data_path);
    Design design = build_design(table, config);
    const auto fixed_names = design.fixed_names;
    const auto random_names = design.random_names;
    const Model model = validate(std::move(design.dataset), std::move(design.spec));

    const FitReport report = fit(model, solve_options(config));

    if (config.output.report) {
      auto file = open_output(*config.output.report);
      file << report_to_json(report, fixed_names, random_names).dump(2) << '\n';
    }
    if (config.output.trace) {
      auto file = open_output(*config.output.trace);
      write_trace(file, report.trace);
    }
    write_summary(out, report, fixed_names);
    if (report.status != FitStatus::converged) {
      err << "warning: fit did not converge: " << report.message << '\n';
      return static_cast<int>(kExitNoConvergence);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = read_config(config_path);
    if (!config.simulation) throw InputError(config_path.string() + ": key 'simulation' is required");
    const SimulationConfig& sim = *config.simulation;
    const Index n = sim.n;

    Table table;
    table.header.push_back(config.response);
    std::vector<std::vector<std::string>> columns;
    std::set<std::string> seen{config.response};
    std::set<std::string> numeric_cols;
    std::set<std::string> factor_cols;

    std::mt19937_64 covariate_rng;
    {
      std::seed_seq seq{static_cast<std::uint32_t>(sim.seed), static_cast<std::uint32_t>(sim.seed >> 32),
                        0x636f7661u};
      covariate_rng.seed(seq);
    }
    std::normal_distribution<double> normal;

    auto add_factor = [&](const std::string& column, const std::string& key) {
      if (numeric_cols.count(column)) throw InputError(key + ": column '" + column + "' is already numeric");
      factor_cols.insert(column);
      if (!seen.insert(column).second) return;
      const int count = level_count(sim, column, key);
      std::vector<std::string> values;
      for (Index i = 0; i < n; ++i) values.push_back(level_label(column, static_cast<int>(i % count), count));
      table.header.push_back(column);
      columns.push_back(std::move(values));
    };
    for (size_t t = 0; t < config.fixed.size(); ++t) {
      const FixedTerm& term = config.fixed[t];
      const std::string key = "model.fixed[" + std::to_string(t) + "]";
      if (term.type == FixedTerm::Type::factor) {
        add_factor(term.column, key);
        continue;
      }
      if (factor_cols.count(term.column)) throw InputError(key + ": column '" + term.column + "' is a factor");
      if (term.column == config.response) throw InputError(key + ": column '" + term.column + "' is the response");
      numeric_cols.insert(term.column);
      if (!seen.insert(term.column).second) continue;
      std::vector<std::string> values;
      for (Index i = 0; i < n; ++i) values.push_back(format_double(normal(covariate_rng)));
      table.header.push_back(term.column);
      columns.push_back(std::move(values));
    }
    for (size_t g = 0; g < config.random.size(); ++g) {
      add_factor(config.random[g].factor, "model.random[" + std::to_string(g) + "]");
    }
    if (config.residual.partition) add_factor(*config.residual.partition, "model.residual.partition");

    table.rows.assign(static_cast<size_t>(n), std::vector<std::string>(table.header.size()));
    for (size_t i = 0; i < table.rows.size(); ++i) {
      table.rows[i][0] = "0";
      for (size_t j = 0; j < columns.size(); ++j) table.rows[i][j + 1] = columns[j][i];
    }

    const Model model = build_model(table, config);
    const VectorXd y = simulate_y(model, SimConfig{sim.theta, sim.seed, sim.tau}, 0);
    for (size_t i = 0; i < table.rows.size(); ++i) table.rows[i][0] = format_double(y(static_cast<Index>(i)));

    auto file = open_output(out_path);
    write_csv(file, table);
    if (!file) throw InputError("failed writing '" + out_path.string() + "'");
    out << "wrote " << n << " rows to " << out_path.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_check(const std::filesystem::path& data_path, const std::filesystem::path& config_path, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = read_config(config_path);
    const Table table = read_csv(data_path);
    const Model model = build_model(table, config);
    const Theta theta = config.solver.init ? *config.solver.init : initial_theta(model);
    model.require_admissible(theta);

    if (model.n() > config.check.cap) {
      out << "n = " << model.n() << " exceeds the check cap of " << config.check.cap << "; checks skipped\n";
    }
    const auto results = oracle::run_identity_suite(model, theta, config.check.cap);
    bool failed = false;
    char line[512];
    for (const auto& r : results) {
      std::snprintf(line, sizeof line, "%-4s  %-46s residual=%.3e  tol=%.1e\n",
                    std::string(oracle::to_string(r.status)).c_str(), r.name.c_str(), r.residual, r.tolerance);
      out << line;
      failed = failed || r.status == oracle::CheckStatus::fail;
    }
    return static_cast<int>(failed ? kExitCheckFailed : kExitOk);
  });
}

}  // namespace aireml::cli
