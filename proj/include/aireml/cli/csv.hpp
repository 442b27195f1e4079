#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "aireml/model.hpp"

namespace aireml::cli {

/// Malformed input file, unknown column or bad configuration value.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A CSV file with a header row, kept as strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index num_rows() const { return static_cast<Index>(rows.size()); }
  /// Column index by name; `context` names the config key that referenced it.
  size_t column(const std::string& name, const std::string& context) const;
  std::vector<std::string> strings(const std::string& name, const std::string& context) const;
  VectorXd numbers(const std::string& name, const std::string& context) const;
};

Table parse_csv(std::istream& in, const std::string& source);
Table read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Table& table);

/// Dense numeric matrix without a header row.
MatrixXd read_matrix_csv(const std::filesystem::path& path);

double parse_number(const std::string& text, const std::string& where);
/// %.17g, which round-trips every double.
std::string format_double(double value);

}  // namespace aireml::cli
