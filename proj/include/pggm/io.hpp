#ifndef PGGM_IO_HPP
#define PGGM_IO_HPP

// CSV matrices, group files and JSON conversion helpers. Doubles are written
// with 17 significant digits so that files round-trip exactly.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pggm/errors.hpp"
#include "pggm/model.hpp"

namespace pggm::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

}  // namespace detail

struct CsvTable {
  Eigen::MatrixXd values;
  std::vector<std::string> header;  // empty when the file has none
};

/// Comma-separated numeric table. A first row that does not parse as numbers is
/// taken as a header. Errors name the file and line.
inline CsvTable parse_csv(std::istream& in, const std::string& name = "<csv>") {
  CsvTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!detail::parse_number(fields[j], row[j])) {
        numeric = false;
        bad = j;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && t.header.empty()) {
        t.header = fields;
        width = fields.size();
        continue;
      }
      throw DataError(name + ":" + std::to_string(line_no) + ": field " + std::to_string(bad + 1) +
                      " is not a number: '" + fields[bad] + "'");
    }
    for (std::size_t j = 0; j < row.size(); ++j)
      if (!std::isfinite(row[j]))
        throw DataError(name + ":" + std::to_string(line_no) + ": field " + std::to_string(j + 1) +
                        " is not finite");
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw DataError(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(name + ": no data rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv(in, path);
}

inline void write_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

/// Group file: a JSON array of positive group sizes.
inline GroupStructure parse_groups(const std::string& text, const std::string& name = "<groups>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(name + ": " + e.what());
  }
  if (!j.is_array() || j.empty()) throw DataError(name + ": expected a non-empty JSON array of group sizes");
  std::vector<int> sizes;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw DataError(name + ": group sizes must be positive integers");
    sizes.push_back(v.get<int>());
  }
  return GroupStructure(sizes);
}

inline GroupStructure read_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_groups(ss.str(), path);
}

// JSON values. Matrices are arrays of rows.

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw DataError("expected a matrix as an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_array() || static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw DataError("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

/// Serializes with every double printed by format_double (17 significant
/// digits). A negative indent gives a single line.
inline void dump_json(std::ostream& out, const json& j, int indent = 2, int depth = 0) {
  const bool pretty = indent >= 0;
  const std::string pad = pretty ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = pretty ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = pretty ? "\n" : "";
  if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << '{' << nl;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out << ',' << nl;
      first = false;
      out << pad << json(it.key()).dump() << (pretty ? ": " : ":");
      dump_json(out, it.value(), indent, depth + 1);
    }
    out << nl << close_pad << '}';
  } else if (j.is_array()) {
    // Arrays of scalars stay on one line.
    bool flat = !pretty;
    if (pretty) {
      flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
    }
    if (j.empty()) {
      out << "[]";
    } else if (flat) {
      out << '[';
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out << (pretty ? ", " : ",");
        dump_json(out, j[k], indent, depth + 1);
      }
      out << ']';
    } else {
      out << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out << ",\n";
        out << pad;
        dump_json(out, j[k], indent, depth + 1);
      }
      out << '\n' << close_pad << ']';
    }
  } else if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x)) out << format_double(x);
    else out << "null";
  } else {
    out << j.dump();
  }
}

inline std::string dump_json_line(const json& j) {
  std::ostringstream ss;
  dump_json(ss, j, -1);
  return ss.str();
}

inline std::string dump_json(const json& j) {
  std::ostringstream ss;
  dump_json(ss, j);
  ss << '\n';
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("error writing " + path);
}

}  // namespace pggm::io

#endif  // PGGM_IO_HPP
