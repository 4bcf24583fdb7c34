#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sawqed/errors.hpp"

namespace sawqed::csv {

// 12 significant digits, locale independent.
inline std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

using Cell = std::variant<double, std::string>;

// Writes `#`-prefixed metadata, one units line, the header row, then data.
class Table {
 public:
  Table(std::vector<std::string> columns, std::vector<std::string> units)
      : columns_(std::move(columns)), units_(std::move(units)) {
    if (columns_.size() != units_.size()) throw ValidationError("csv: one unit per column required");
  }

  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void meta(const std::string& key, double value) { meta_.emplace_back(key, format(value)); }

  void row(std::vector<Cell> cells) {
    if (cells.size() != columns_.size()) throw ValidationError("csv: row width does not match header");
    rows_.push_back(std::move(cells));
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream out;
    for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << '\n';
    out << "# units: " << join(units_) << '\n';
    out << join(columns_) << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out << ',';
        if (const double* d = std::get_if<double>(&r[i])) {
          out << format(*d);
        } else {
          out << std::get<std::string>(r[i]);
        }
      }
      out << '\n';
    }
    return out.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << str();
    if (!f) throw IoError("failed while writing '" + path + "'");
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += v[i];
    }
    return s;
  }

  std::vector<std::string> columns_;
  std::vector<std::string> units_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<Cell>> rows_;
};

// Reads a numeric CSV: skips `#` lines, takes the first remaining line as the
// header and returns rows keyed by column position.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ValidationError("csv: missing column '" + name + "'");
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

inline NumericTable read_numeric(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  NumericTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) throw ParseError("csv: ragged row in '" + path + "'");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw ParseError("csv: bad number '" + c + "'");
      } catch (const std::logic_error&) {
        throw ParseError("csv: bad number '" + c + "' in '" + path + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("csv: '" + path + "' has no header");
  return t;
}

}  // namespace sawqed::csv
