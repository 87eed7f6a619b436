#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "granular/dsmc.hpp"
#include "granular/haff.hpp"
#include "granular/restitution.hpp"

namespace granular {

/// A small TOML subset: `key = value` lines, `[table]` headers, `#`
/// comments. Values are numbers, booleans, "strings" or flat arrays of
/// numbers. Keys are stored with their table prefix (`restitution.kind`).
class ConfigDocument {
public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;
  struct Entry {
    Value value;
    int line = 0;
    int column = 0;
  };

  /// Throws ConfigError with line and column on syntax errors and duplicate keys.
  static ConfigDocument parse(std::istream& is);
  static ConfigDocument parse_file(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  // Typed getters; a missing key yields the fallback, a wrong type a ConfigError.
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError at the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

  /// Canonical `key = value` text, one entry per line (used as the config echo).
  std::string echo() const;

private:
  const Entry* find(const std::string& key) const;
  std::map<std::string, Entry> entries_;
};

/// `restitution.kind` is constant (e0), power_law (alpha, gamma, e_floor or
/// clamp = false) or viscoelastic (a).
RestitutionModel restitution_from(const ConfigDocument& doc);
SimulationConfig simulation_config_from(const ConfigDocument& doc);
MatrixConfig matrix_config_from(const ConfigDocument& doc);

}  // namespace granular
