#include "granular/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "granular/error.hpp"
#include "granular/time_series.hpp"

namespace granular {

namespace {

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class LineCursor {
public:
  LineCursor(const std::string& text, int line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  int column() const { return int(pos_) + 1; }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_, column()); }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_key_char(s_[pos_]) || s_[pos_] == '.')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_'))
      ++pos_;
    std::string token = s_.substr(start, pos_ - start);
    std::erase(token, '_');
    if (!token.empty() && token.front() == '+') token.erase(0, 1);
    double v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      pos_ = start;
      fail("invalid number '" + s_.substr(start, std::max<std::size_t>(1, token.size())) + "'");
    }
    return v;
  }

  ConfigDocument::Value value() {
    skip_ws();
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return out;
    }
    if (c == '[') {
      ++pos_;
      std::vector<double> xs;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
        return xs;
      }
      while (true) {
        xs.push_back(number());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ']') {
            ++pos_;
            return xs;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          return xs;
        }
        fail("expected ',' or ']' in array");
      }
    }
    if (s_.compare(pos_, 4, "true") == 0 && !is_key_char(pos_ + 4 < s_.size() ? s_[pos_ + 4] : ' ')) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0 && !is_key_char(pos_ + 5 < s_.size() ? s_[pos_ + 5] : ' ')) {
      pos_ += 5;
      return false;
    }
    if (c == '\0' || c == '#') fail("missing value");
    return number();
  }

private:
  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

const char* type_name(const ConfigDocument::Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    default: return "array";
  }
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::istream& is) {
  ConfigDocument doc;
  std::set<std::string> tables;
  std::string prefix;
  std::string text;
  int line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    LineCursor cur(text, line);
    if (cur.at_end_or_comment()) continue;
    if (cur.peek() == '[') {
      cur.expect('[');
      const std::string name = cur.key();
      const int col = cur.column();
      cur.expect(']');
      if (!cur.at_end_or_comment()) cur.fail("trailing characters after table header");
      if (!tables.insert(name).second) throw ConfigError("duplicate table [" + name + "]", line, col);
      prefix = name + ".";
      continue;
    }
    const int col = cur.column();
    const std::string key = prefix + cur.key();
    cur.expect('=');
    Value v = cur.value();
    if (!cur.at_end_or_comment()) cur.fail("trailing characters after value");
    if (doc.entries_.count(key)) throw ConfigError("duplicate key '" + key + "'", line, col);
    doc.entries_.emplace(key, Entry{std::move(v), line, col});
  }
  return doc;
}

ConfigDocument ConfigDocument::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

const ConfigDocument::Entry* ConfigDocument::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {
template <class T>
const T& typed(const ConfigDocument::Entry& e, const std::string& key, const char* want) {
  if (const T* v = std::get_if<T>(&e.value)) return *v;
  throw ConfigError("key '" + key + "' must be a " + want + ", got " + type_name(e.value), e.line, e.column);
}
}  // namespace

double ConfigDocument::number(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  return e ? typed<double>(*e, key, "number") : fallback;
}

long long ConfigDocument::integer(const std::string& key, long long fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const double v = typed<double>(*e, key, "number");
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("key '" + key + "' must be an integer", e->line, e->column);
  return static_cast<long long>(v);
}

bool ConfigDocument::boolean(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  return e ? typed<bool>(*e, key, "boolean") : fallback;
}

std::string ConfigDocument::string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? typed<std::string>(*e, key, "string") : fallback;
}

std::vector<double> ConfigDocument::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  return e ? typed<std::vector<double>>(*e, key, "array") : fallback;
}

void ConfigDocument::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, e] : entries_) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", e.line, e.column);
  }
}

std::string ConfigDocument::echo() const {
  std::ostringstream os;
  for (const auto& [key, e] : entries_) {
    os << key << " = ";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) os << format_double(v);
          else if constexpr (std::is_same_v<T, bool>) os << (v ? "true" : "false");
          else if constexpr (std::is_same_v<T, std::string>) os << '"' << v << '"';
          else {
            os << '[';
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_double(v[i]);
            os << ']';
          }
        },
        e.value);
    os << '\n';
  }
  return os.str();
}

namespace {

const std::set<std::string> kRestitutionKeys = {"restitution.kind", "restitution.e0", "restitution.alpha",
                                                "restitution.gamma", "restitution.e_floor", "restitution.clamp",
                                                "restitution.a"};

ConfigError at(const ConfigDocument& doc, const std::string& key, const std::string& what) {
  const auto it = doc.entries().find(key);
  if (it == doc.entries().end()) return ConfigError(what);
  return ConfigError(what, it->second.line, it->second.column);
}

}  // namespace

RestitutionModel restitution_from(const ConfigDocument& doc) {
  const std::string kind = doc.string("restitution.kind", "");
  try {
    if (kind == "constant") return RestitutionModel::constant(doc.number("restitution.e0", 1.0));
    if (kind == "power_law") {
      std::optional<double> floor = doc.number("restitution.e_floor", 0.05);
      if (!doc.boolean("restitution.clamp", true)) floor.reset();
      return RestitutionModel::power_law(doc.number("restitution.alpha", 0.0), doc.number("restitution.gamma", 0.0),
                                         floor);
    }
    if (kind == "viscoelastic") return RestitutionModel::viscoelastic(doc.number("restitution.a", 0.0));
  } catch (const DomainError& ex) {
    throw at(doc, "restitution.kind", ex.what());
  }
  if (kind.empty()) throw ConfigError("missing restitution.kind");
  throw at(doc, "restitution.kind", "unknown restitution kind '" + kind + "'");
}

SimulationConfig simulation_config_from(const ConfigDocument& doc) {
  std::set<std::string> known = kRestitutionKeys;
  known.insert({"particles", "t_end", "t_first", "points_per_decade", "output_times", "stop_energy_ratio", "seed",
                "majorant_refresh", "moment_ps", "entropy_k", "collisions_per_step", "init.kind", "init.theta",
                "init.radius", "init.theta1", "init.theta2", "init.mix"});
  doc.reject_unknown(known);

  SimulationConfig c;
  const long long n = doc.integer("particles", static_cast<long long>(c.particles));
  if (n < 2) throw at(doc, "particles", "particles must be >= 2");
  c.particles = static_cast<std::size_t>(n);
  c.model = restitution_from(doc);
  c.t_end = doc.number("t_end", c.t_end);
  c.t_first = doc.number("t_first", c.t_first);
  c.points_per_decade = static_cast<int>(doc.integer("points_per_decade", c.points_per_decade));
  c.output_times = doc.numbers("output_times", {});
  if (doc.has("stop_energy_ratio")) c.stop_energy_ratio = doc.number("stop_energy_ratio", 0.0);
  const long long seed = doc.integer("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw at(doc, "seed", "seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.majorant_refresh = static_cast<int>(doc.integer("majorant_refresh", c.majorant_refresh));
  c.moment_ps = doc.numbers("moment_ps", c.moment_ps);
  c.entropy_k = static_cast<int>(doc.integer("entropy_k", c.entropy_k));
  c.collisions_per_step = doc.number("collisions_per_step", c.collisions_per_step);

  const std::string init = doc.string("init.kind", "maxwellian");
  if (init == "maxwellian") c.init = MaxwellianInit{doc.number("init.theta", 1.0 / 3.0)};
  else if (init == "uniform_ball") c.init = UniformBallInit{doc.number("init.radius", 1.0)};
  else if (init == "two_temperature")
    c.init = TwoTemperatureInit{doc.number("init.theta1", 1.0), doc.number("init.theta2", 0.1), doc.number("init.mix", 0.5)};
  else throw at(doc, "init.kind", "unknown init kind '" + init + "'");

  c.validate();
  return c;
}

MatrixConfig matrix_config_from(const ConfigDocument& doc) {
  doc.reject_unknown({"constant_e", "viscoelastic_a", "particles", "energy_drop", "t_max", "entropy_k", "seed"});
  MatrixConfig m;
  m.constant_e = doc.numbers("constant_e", m.constant_e);
  m.viscoelastic_a = doc.numbers("viscoelastic_a", m.viscoelastic_a);
  const long long n = doc.integer("particles", static_cast<long long>(m.particles));
  if (n < 2) throw at(doc, "particles", "particles must be >= 2");
  m.particles = static_cast<std::size_t>(n);
  m.energy_drop = doc.number("energy_drop", m.energy_drop);
  if (!(m.energy_drop > 0.0 && m.energy_drop < 1.0)) throw at(doc, "energy_drop", "energy_drop must lie in (0, 1)");
  m.t_max = doc.number("t_max", m.t_max);
  if (!(m.t_max > 0.0)) throw at(doc, "t_max", "t_max must be positive");
  m.entropy_k = static_cast<int>(doc.integer("entropy_k", m.entropy_k));
  const long long seed = doc.integer("seed", static_cast<long long>(m.seed));
  if (seed < 0) throw at(doc, "seed", "seed must be non-negative");
  m.seed = static_cast<std::uint64_t>(seed);
  return m;
}

}  // namespace granular
