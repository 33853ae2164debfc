#pragma once

// External text formats: DIMACS CNF (plain and weighted), edge lists, CSV and
// SVG line charts, plus SHA-256 digests of emitted files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "collusion/cnf.hpp"
#include "collusion/graph.hpp"

namespace collusion::io {

// "p cnf <vars> <clauses>" followed by 0-terminated clauses; "c" lines are
// comments. Errors name the line.
Cnf parse_dimacs(const std::string& text);
std::string write_dimacs(const Cnf& cnf);

// "p wcnf <vars> <clauses>" with the clause weight before its literals.
WeightedCnf parse_wcnf(const std::string& text);

// One "u v" pair per line, 0-indexed; blank lines and lines starting with '#'
// are skipped. Duplicate edges collapse; the vertex count is the largest
// index plus one unless a "# vertices n" line says more.
Graph parse_graph(const std::string& text);
std::string write_graph(const Graph& graph);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

using CsvValue = std::variant<std::string, double, std::int64_t, std::uint64_t>;

// Doubles use 12 significant digits; NaN is written as "nan". Fields that
// contain separators or quotes are quoted.
std::string format_csv_value(const CsvValue& value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(std::vector<CsvValue> row);  // length must match the header
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;  // header plus records, LF line endings

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<CsvValue>> rows_;
};

void emit_csv(const CsvTable& table, const std::filesystem::path& path);

struct SvgSeries {
  std::string label;
  std::vector<double> y;  // NaN points are skipped
};

// Line chart over categorical x positions.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<std::string>& x_ticks, const std::vector<SvgSeries>& series);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace collusion::io
