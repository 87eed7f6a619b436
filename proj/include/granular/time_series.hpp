#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

/// Column-oriented table of sampled diagnostics. The first column is
/// conventionally `t`. Serialised as CSV with 17 significant digits.
class TimeSeries {
public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<std::string> names);

  void append(std::span<const double> row);

  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has(std::string_view name) const;
  /// Throws DomainError for an unknown column.
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<double>& time() const { return column("t"); }

  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
  /// Throws ConfigError (with line numbers) on malformed input.
  static TimeSeries read_csv(std::istream& is);
  static TimeSeries read_csv_file(const std::string& path);

private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

/// Column label for the moment of order p: `m_0.5`, `m_1`, `m_1.5`, ...
std::string moment_label(double p);

/// `%.17g` text for a double (round-trips exactly); nan/inf spelled out.
std::string format_double(double v);

}  // namespace granular
