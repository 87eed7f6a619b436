#include "granular/time_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "granular/error.hpp"

namespace granular {

TimeSeries::TimeSeries(std::vector<std::string> names) : names_(std::move(names)), columns_(names_.size()) {}

void TimeSeries::append(std::span<const double> row) {
  if (row.size() != columns_.size()) throw DomainError("TimeSeries::append: row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) columns_[i].push_back(row[i]);
}

bool TimeSeries::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& TimeSeries::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DomainError("no column named '" + std::string(name) + "'");
  return columns_[std::size_t(it - names_.begin())];
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string moment_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "m_%g", p);
  return buf;
}

void TimeSeries::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < names_.size(); ++i) os << (i ? "," : "") << names_[i];
  os << '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << format_double(columns_[c][r]);
    os << '\n';
  }
}

void TimeSeries::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  write_csv(os);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, int line, int col) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("malformed number '" + s + "'", line, col);
  return v;
}

}  // namespace

TimeSeries TimeSeries::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  TimeSeries ts(split(line));
  std::vector<double> row;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != ts.names_.size()) throw ConfigError("wrong number of fields", lineno, 1);
    row.clear();
    int col = 1;
    for (const auto& c : cells) {
      row.push_back(parse_cell(c, lineno, col));
      col += int(c.size()) + 1;
    }
    ts.append(row);
  }
  return ts;
}

TimeSeries TimeSeries::read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  return read_csv(is);
}

}  // namespace granular
