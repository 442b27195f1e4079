#include "aireml/cli/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace aireml::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

bool blank(const std::string& line) { return trim(line).empty(); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

size_t Table::column(const std::string& name, const std::string& context) const {
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw InputError("column '" + name + "' referenced by " + context + " is not in the dataset");
}

std::vector<std::string> Table::strings(const std::string& name, const std::string& context) const {
  const size_t j = column(name, context);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][j].empty()) {
      throw InputError("column '" + name + "' has an empty value on data row " + std::to_string(i + 1));
    }
    out.push_back(rows[i][j]);
  }
  return out;
}

VectorXd Table::numbers(const std::string& name, const std::string& context) const {
  const size_t j = column(name, context);
  VectorXd out(num_rows());
  for (size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Index>(i)) =
        parse_number(rows[i][j], "column '" + name + "', data row " + std::to_string(i + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw InputError("empty value in " + where);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InputError("'" + t + "' in " + where + " is not a finite number");
  }
  return v;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Table parse_csv(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  while (std::getline(in, line) && blank(line)) {
  }
  if (blank(line)) throw InputError(source + ": missing header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  t.header = split_line(line);
  for (size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j].empty()) throw InputError(source + ": header column " + std::to_string(j + 1) + " is empty");
    for (size_t k = 0; k < j; ++k) {
      if (t.header[k] == t.header[j]) throw InputError(source + ": duplicate column '" + t.header[j] + "'");
    }
  }
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto fields = split_line(line);
    if (fields.size() != t.header.size()) {
      throw InputError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const Table& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<double> row;
    const auto fields = split_line(line);
    for (size_t j = 0; j < fields.size(); ++j) {
      row.push_back(parse_number(fields[j], path.string() + " line " + std::to_string(line_no) + " field " +
                                                std::to_string(j + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " values, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": matrix file is empty");
  MatrixXd M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return M;
}

}  // namespace aireml::cli
