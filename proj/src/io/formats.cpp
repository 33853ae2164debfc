#include "collusion/io/formats.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "collusion/error.hpp"

namespace collusion::io {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

[[noreturn]] void line_error(std::size_t line, const std::string& message) {
  throw ValidationError("line " + std::to_string(line) + ": " + message);
}

bool parse_long(const std::string& token, long long& out) {
  if (token.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(token, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == token.size();
}

struct DimacsBody {
  std::size_t num_vars = 0;
  std::size_t declared = 0;
  std::vector<Clause> clauses;
  std::vector<double> weights;
};

DimacsBody parse_dimacs_body(const std::string& text, const std::string& format) {
  DimacsBody out;
  bool header = false;
  const bool weighted = format == "wcnf";
  Clause current;
  bool open = false;  // clause started but not terminated
  bool expect_weight = weighted;
  std::size_t current_line = 0;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    std::istringstream in(lines[ln]);
    std::string tok;
    if (!(in >> tok)) continue;
    if (tok == "c" || tok[0] == 'c') continue;
    if (tok == "%") break;
    if (tok == "p") {
      if (header) line_error(lineno, "duplicate problem line");
      std::string fmt, extra;
      long long v = -1, c = -1;
      std::string vs, cs;
      if (!(in >> fmt >> vs >> cs) || fmt != format || !parse_long(vs, v) || !parse_long(cs, c) || v < 0 || c < 0)
        line_error(lineno, "malformed header, expected 'p " + format + " <variables> <clauses>'");
      if (in >> extra) line_error(lineno, "malformed header, unexpected '" + extra + "'");
      out.num_vars = static_cast<std::size_t>(v);
      out.declared = static_cast<std::size_t>(c);
      header = true;
      continue;
    }
    if (!header) line_error(lineno, "clause before the 'p " + format + "' header");
    do {
      if (expect_weight) {
        std::size_t pos = 0;
        double w = 0.0;
        try {
          w = std::stod(tok, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != tok.size() || !std::isfinite(w) || w < 0.0) line_error(lineno, "bad clause weight '" + tok + "'");
        out.weights.push_back(w);
        expect_weight = false;
        open = true;
        current_line = lineno;
        continue;
      }
      long long lit = 0;
      if (!parse_long(tok, lit)) line_error(lineno, "bad literal '" + tok + "'");
      if (lit == 0) {
        out.clauses.push_back(std::move(current));
        current.clear();
        open = false;
        expect_weight = weighted;
        continue;
      }
      const auto var = static_cast<unsigned long long>(lit < 0 ? -lit : lit);
      if (var > out.num_vars)
        line_error(lineno, "literal " + tok + " out of range for " + std::to_string(out.num_vars) + " variables");
      current.push_back(static_cast<Literal>(lit));
      if (!open) current_line = lineno;
      open = true;
    } while (in >> tok);
  }
  if (!header) throw ValidationError("missing 'p " + format + "' header");
  if (open) line_error(current_line, "clause is missing its terminating 0");
  if (out.clauses.size() != out.declared)
    throw ValidationError("header declares " + std::to_string(out.declared) + " clauses but " +
                          std::to_string(out.clauses.size()) + " were given");
  return out;
}

}  // namespace

Cnf parse_dimacs(const std::string& text) {
  auto body = parse_dimacs_body(text, "cnf");
  return {body.num_vars, std::move(body.clauses)};
}

WeightedCnf parse_wcnf(const std::string& text) {
  auto body = parse_dimacs_body(text, "wcnf");
  return {body.num_vars, std::move(body.clauses), std::move(body.weights)};
}

std::string write_dimacs(const Cnf& cnf) {
  std::ostringstream out;
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) {
    for (Literal l : c) out << l << ' ';
    out << "0\n";
  }
  return out.str();
}

Graph parse_graph(const std::string& text) {
  std::set<Edge> edges;
  std::size_t n = 0;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    std::istringstream in(lines[ln]);
    std::string a, b, extra;
    if (!(in >> a)) continue;
    if (a[0] == '#') {
      std::string key, value;
      std::istringstream hdr(lines[ln].substr(lines[ln].find('#') + 1));
      long long v = 0;
      if (hdr >> key >> value && key == "vertices" && parse_long(value, v) && v >= 0)
        n = std::max(n, static_cast<std::size_t>(v));
      continue;
    }
    if (!(in >> b)) line_error(lineno, "expected 'u v'");
    if (in >> extra) line_error(lineno, "unexpected '" + extra + "' after the edge");
    long long u = 0, v = 0;
    if (!parse_long(a, u) || !parse_long(b, v)) line_error(lineno, "vertex indices must be integers");
    if (u < 0 || v < 0) line_error(lineno, "negative vertex index");
    if (u == v) line_error(lineno, "self-loop on vertex " + a);
    const auto x = static_cast<std::size_t>(std::min(u, v));
    const auto y = static_cast<std::size_t>(std::max(u, v));
    edges.emplace(x, y);
    n = std::max(n, y + 1);
  }
  return Graph(n, std::vector<Edge>(edges.begin(), edges.end()));
}

std::string write_graph(const Graph& graph) {
  std::ostringstream out;
  out << "# vertices " << graph.num_vertices() << '\n';
  for (const auto& [u, v] : graph.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string format_csv_value(const CsvValue& value) {
  if (const auto* d = std::get_if<double>(&value)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", *d == 0.0 ? 0.0 : *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&value)) return std::to_string(*u);
  const auto& s = std::get<std::string>(value);
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ValidationError("a CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<CsvValue> row) {
  if (row.size() != columns_.size())
    throw ValidationError("CSV row has " + std::to_string(row.size()) + " fields, expected " +
                          std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += format_csv_value(columns_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_csv_value(row[i]);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) { write_file(path, table.str()); }

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<std::string>& x_ticks, const std::vector<SvgSeries>& series) {
  const double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (double y : s.y)
      if (std::isfinite(y)) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const std::size_t nx = std::max<std::size_t>(x_ticks.size(), 1);
  auto xpos = [&](std::size_t i) { return left + (nx == 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(nx - 1)); };
  auto ypos = [&](double y) { return top + ph * (hi - y) / (hi - lo); };
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  char buf[256];
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << esc(title) << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                left, top, pw, ph);
  o << buf;
  for (int k = 0; k <= 4; ++k) {
    const double y = lo + (hi - lo) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%.3g</text>\n",
                  left - 6, ypos(y) + 4, y);
    o << buf;
  }
  for (std::size_t i = 0; i < x_ticks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\">", xpos(i),
                  top + ph + 18);
    o << buf << esc(x_ticks[i]) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << esc(x_label) << "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 %.1f)\">",
                top + ph / 2, top + ph / 2);
  o << buf << esc(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 5];
    std::string points;
    for (std::size_t i = 0; i < series[s].y.size() && i < nx; ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", xpos(i), ypos(series[s].y[i]));
      points += buf;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", xpos(i),
                    ypos(series[s].y[i]), color);
      o << buf;
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">", left + 8,
                  top + 16 + 16.0 * static_cast<double>(s), color);
    o << buf << esc(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace collusion::io
