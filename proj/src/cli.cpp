#include "granular/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "granular/config.hpp"
#include "granular/dissipation.hpp"
#include "granular/dsmc.hpp"
#include "granular/entropy.hpp"
#include "granular/error.hpp"
#include "granular/haff.hpp"
#include "granular/moments.hpp"
#include "granular/restitution.hpp"
#include "granular/stats.hpp"

#ifndef GRANULAR_VERSION
#define GRANULAR_VERSION "unknown"
#endif

namespace granular {

std::string code_version() { return "granular " GRANULAR_VERSION; }

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string format = "table";
  bool strict = false;
  std::string out_dir = ".";
};

using Table = std::vector<std::vector<std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_table(std::ostream& out, const Table& rows, const std::string& format) {
  if (format == "csv") {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << r[i];
      if (i + 1 < r.size()) out << std::string(width[i] - r[i].size(), ' ');
    }
    out << '\n';
    if (k == 0 && rows.size() > 1) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Manifest {
public:
  Manifest(std::string command, const Globals& g) : path_() {
    doc_["command"] = std::move(command);
    doc_["code_version"] = code_version();
    doc_["start"] = iso_now();
    doc_["options"] = {{"format", g.format}, {"strict", g.strict}, {"out_dir", g.out_dir}};
    doc_["outputs"] = json::array();
  }
  void config(const std::string& path, const ConfigDocument& cfg) {
    doc_["config_path"] = path;
    doc_["config"] = cfg.echo();
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  json& extra() { return doc_; }
  void write(const std::string& path, const std::string& status) {
    doc_["status"] = status;
    doc_["end"] = iso_now();
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << doc_.dump(2) << '\n';
  }

private:
  std::string path_;
  json doc_;
};

int cmd_run(const std::string& config_path, const Globals& g, std::ostream& out) {
  const ConfigDocument doc = ConfigDocument::parse_file(config_path);
  SimulationConfig cfg = simulation_config_from(doc);
  if (g.seed) cfg.seed = *g.seed;

  fs::create_directories(g.out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  const std::string csv = (fs::path(g.out_dir) / (stem + ".csv")).string();
  const std::string manifest_path = (fs::path(g.out_dir) / (stem + ".manifest.json")).string();
  Manifest manifest("run", g);
  manifest.config(config_path, doc);
  manifest.seed(cfg.seed);
  manifest.extra()["model"] = cfg.model.describe();

  RunInfo info;
  TimeSeries partial;
  TimeSeries series;
  try {
    series = run(cfg, &info, &partial);
  } catch (const NumericError&) {
    partial.write_csv(csv);
    manifest.output(csv);
    manifest.write(manifest_path, "numeric_error");
    throw;
  }
  series.write_csv(csv);
  manifest.output(csv);
  manifest.extra()["steps"] = info.steps;
  manifest.extra()["majorant_breaches"] = info.breaches;
  manifest.extra()["stopped_on_energy"] = info.stopped_on_energy;

  // Inline diagnostics: the Haff fit and its sandwich.
  const double gamma = nominal_gamma(cfg.model);
  Table t{{"quantity", "value"}};
  t.push_back({"rows", std::to_string(series.rows())});
  t.push_back({"collisions", std::to_string(static_cast<unsigned long long>(series.column("collisions").back()))});
  t.push_back({"E_final", num(series.column("E").back())});
  bool ok = true;
  if (series.rows() >= 8) {
    try {
      const DecayFit fit = fit_decay(series);
      const SandwichCheck sw = check_sandwich(series, gamma);
      t.push_back({"gamma", num(gamma)});
      t.push_back({"theory_exp", num(-2.0 / (1.0 + gamma))});
      t.push_back({"fitted_exp", num(fit.exponent)});
      t.push_back({"fit_window", num(fit.t_lo) + ".." + num(fit.t_hi)});
      t.push_back({"sandwich_ratio", num(sw.ratio)});
      t.push_back({"sandwich_pass", sw.pass ? "true" : "false"});
      ok = ok && sw.pass;
      if (series.has("entropy")) {
        const EntropyGrowthCheck eg = check_entropy_growth(series);
        t.push_back({"entropy_slope", num(eg.slope)});
        t.push_back({"entropy_growth_pass", eg.pass ? "true" : "false"});
        ok = ok && eg.pass;
      }
    } catch (const DomainError& ex) {
      t.push_back({"diagnostics", std::string("skipped: ") + ex.what()});
    }
  }
  t.push_back({"csv", csv});
  manifest.write(manifest_path, "ok");
  print_table(out, t, g.format);
  return (g.strict && !ok) ? kExitVerdictFailed : kExitOk;
}

int cmd_thresholds(std::optional<double> gamma, double a_bound, double rho, const Globals& g, std::ostream& out) {
  Table t{{"quantity", "value"}};
  if (!gamma) {
    const ThresholdReport r = constant_threshold();
    t.push_back({"kappa_3/2", num(r.kappa_32)});
    t.push_back({"critical_e", num(r.critical_e)});
    t.push_back({"condition", "3(1-e^2)/8 < 1-kappa_3/2"});
  } else {
    const ThresholdReport r = ell0_threshold(*gamma, a_bound, rho);
    t.push_back({"kappa_3/2", num(r.kappa_32)});
    t.push_back({"gamma", num(r.gamma)});
    t.push_back({"A", num(a_bound)});
    t.push_back({"rho_t0", num(rho)});
    t.push_back({"c_gamma", num(r.c_gamma)});
    t.push_back({"alpha", num(r.alpha)});
    t.push_back({"K0", num(r.k0)});
    t.push_back({"K", num(r.k)});
    t.push_back({"ell0", num(r.ell0)});
    t.push_back({"ell0_capped", r.ell0_capped ? "true" : "false"});
  }
  print_table(out, t, g.format);
  return kExitOk;
}

int cmd_inequalities(std::size_t mixtures, std::size_t balls, std::size_t maxwellians, const Globals& g,
                     std::ostream& out) {
  const std::uint64_t seed = g.seed.value_or(2024);
  const auto family = standard_family(mixtures, balls, maxwellians, seed);
  const InequalityReport rep = check_inequalities(family);
  if (g.format == "csv") {
    Table t{{"name", "m2", "h_abs", "moment_bound", "hbar_k1", "hbar_k2", "slack", "pass"}};
    for (const auto& r : rep.rows) {
      t.push_back({r.name, num(r.m2), num(r.h_abs), num(r.moment_bound), num(r.hbar_k1), num(r.hbar_k2), num(r.slack),
                   r.pass ? "true" : "false"});
    }
    print_table(out, t, "csv");
  } else {
    Table t{{"quantity", "value"}};
    t.push_back({"distributions", std::to_string(rep.rows.size())});
    t.push_back({"violations", std::to_string(rep.violations)});
    t.push_back({"worst_slack", num(rep.worst_slack)});
    t.push_back({"worst_case", rep.worst_name});
    t.push_back({"seed", std::to_string(seed)});
    print_table(out, t, "table");
  }
  return (g.strict && rep.violations > 0) ? kExitVerdictFailed : kExitOk;
}

int cmd_fit(const std::string& csv, double gamma, const std::string& column, std::optional<double> t_lo,
            std::optional<double> t_hi, const Globals& g, std::ostream& out) {
  if (!(gamma >= 0.0)) throw ConfigError("--gamma must be >= 0");
  const TimeSeries series = TimeSeries::read_csv_file(csv);
  TimeWindow w = default_window(series);
  if (t_lo) w.t_lo = *t_lo;
  if (t_hi) w.t_hi = *t_hi;
  const DecayFit fit = fit_decay(series, column, w);
  Table t{{"quantity", "value"}};
  t.push_back({"column", column});
  t.push_back({"exponent", num(fit.exponent)});
  t.push_back({"prefactor", num(fit.prefactor)});
  t.push_back({"t_lo", num(fit.t_lo)});
  t.push_back({"t_hi", num(fit.t_hi)});
  t.push_back({"residual", num(fit.residual)});
  t.push_back({"n_points", std::to_string(fit.n_points)});
  t.push_back({"theory_exp", num(-2.0 / (1.0 + gamma))});
  bool ok = true;
  if (column == "E") {
    const SandwichCheck sw = check_sandwich(series, gamma, w);
    t.push_back({"c_hat", num(sw.c_hat)});
    t.push_back({"C_hat", num(sw.C_hat)});
    t.push_back({"sandwich_pass", sw.pass ? "true" : "false"});
    ok = sw.pass;
  }
  print_table(out, t, g.format);
  return (g.strict && !ok) ? kExitVerdictFailed : kExitOk;
}

int cmd_validate_model(const std::string& config_path, const Globals& g, std::ostream& out) {
  const ConfigDocument doc = ConfigDocument::parse_file(config_path);
  const RestitutionModel model = restitution_from(doc);
  const auto grid = default_grid();
  const AssumptionReport rep = check_assumptions(model, grid);
  auto yes = [](bool b) { return std::string(b ? "pass" : "FAIL"); };
  Table t{{"check", "verdict", "witness", "margin"}};
  auto item = [&](const std::string& name, const AssumptionItem& it) {
    t.push_back({name, yes(it.pass), num(it.witness), num(it.margin)});
  };
  item("e_positive_bounded", rep.positivity);
  item("theta_increasing", rep.theta_increasing);
  item("limsup_e_below_one", rep.limsup_below_one);
  item("psi_monotone_convex", rep.psi_shape);
  t.push_back({"growth_m>=1+gamma/2", yes(rep.growth_ok), num(rep.m_detected), num(rep.gamma_detected)});
  bool ok = rep.hyp1_pass() && rep.growth_ok;
  const double alpha = rep.gamma_detected > 0.0 ? rep.ell : 0.0;
  if (rep.theta_increasing.pass) {
    const PhiAsymptotics pa = phi_asymptotics(model, alpha, rep.gamma_detected, rep.m_detected, grid);
    if (pa.small_checked) {
      t.push_back({"phi_small_speed_law", yes(pa.small_ok), num(alpha),
                   num(pa.small_ratios.empty() ? 0.0 : pa.small_ratios.front())});
      ok = ok && pa.small_ok;
    }
    t.push_back({"phi_large_speed_bound", yes(pa.large_ok), num(rep.m_detected), num(pa.large_trend)});
    ok = ok && pa.large_ok;
  } else {
    // Phi needs the inverse of the impact map.
    t.push_back({"phi_small_speed_law", "skipped", "", ""});
    t.push_back({"phi_large_speed_bound", "skipped", "", ""});
  }
  t.push_back({"ell_gamma", "", num(rep.gamma_detected), num(rep.ell)});
  out << "model: " << model.describe() << '\n';
  print_table(out, t, g.format);
  return (g.strict && !ok) ? kExitVerdictFailed : kExitOk;
}

int cmd_report(const std::string& config_path, const Globals& g, std::ostream& out, std::ostream& err) {
  ConfigDocument doc;
  if (!config_path.empty()) doc = ConfigDocument::parse_file(config_path);
  MatrixConfig cfg = matrix_config_from(doc);
  if (g.seed) cfg.seed = *g.seed;
  cfg.out_dir = g.out_dir;
  Manifest manifest("report", g);
  manifest.config(config_path, doc);
  manifest.seed(cfg.seed);
  const auto rows = experiment_matrix(cfg, &err);
  const std::string summary = (fs::path(g.out_dir) / "summary.csv").string();
  {
    std::ofstream os(summary, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + summary + "' for writing");
    write_summary_csv(rows, os);
  }
  bool ok = true;
  for (const auto& r : rows) {
    for (const auto& f : r.files) manifest.output(f);
    if (!r.error.empty()) ok = false;
  }
  manifest.output(summary);
  manifest.write((fs::path(g.out_dir) / "summary.manifest.json").string(), ok ? "ok" : "partial");
  if (g.format == "csv") {
    write_summary_csv(rows, out);
  } else {
    Table t{{"run_id", "theory_exp", "fitted_exp", "c_hat", "C_hat", "threshold_verdict"}};
    for (const auto& r : rows) {
      if (!r.error.empty()) {
        t.push_back({r.run_id, num(r.theory_exp), "error", "", "", r.error});
        continue;
      }
      t.push_back({r.run_id, num(r.theory_exp), num(r.fitted_exp), num(r.c_hat), num(r.C_hat), r.threshold_verdict});
    }
    print_table(out, t, "table");
  }
  return (g.strict && !ok) ? kExitVerdictFailed : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cooling of granular gases: DSMC runs, thresholds and Haff's-law diagnostics", "granular"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed overriding the config");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"table", "csv"}));
  app.add_flag("--strict", g.strict, "Exit 1 when any verdict fails");
  app.add_option("--out-dir", g.out_dir, "Directory for data files");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a DSMC simulation from a config file");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::optional<double> gamma;
  double a_bound = 1.0, rho = 1.0;
  auto* thr = app.add_subcommand("thresholds", "Critical restitution and the ell0 threshold");
  thr->add_option("--gamma", gamma, "Small-speed exponent gamma > 0 (omit for the constant case)");
  thr->add_option("--A", a_bound, "Uniform bound A on m_{2 gamma}^{1/3}");
  thr->add_option("--rho", rho, "m_{3/2}(t0) / E(t0)^{3/2}");

  std::size_t mixtures = 100, balls = 20, maxwellians = 13;
  auto* ineq = app.add_subcommand("inequalities", "Check the entropy-moment inequalities on analytic families");
  ineq->add_option("--mixtures", mixtures);
  ineq->add_option("--balls", balls);
  ineq->add_option("--maxwellians", maxwellians);

  std::string csv_path, column = "E";
  double fit_gamma = 0.0;
  std::optional<double> t_lo, t_hi;
  auto* fit = app.add_subcommand("fit", "Fit a decay exponent to a time-series CSV");
  fit->add_option("csv", csv_path, "Time-series CSV")->required();
  fit->add_option("--gamma", fit_gamma, "Restitution exponent for the sandwich check");
  fit->add_option("--column", column, "Column to fit");
  fit->add_option("--t-lo", t_lo, "Start of the fit window (default: last 60% of log(1+t))");
  fit->add_option("--t-hi", t_hi, "End of the fit window");

  auto* val = app.add_subcommand("validate-model", "Check the restitution assumptions of a config's model");
  val->add_option("config", config_path, "Config file")->required();

  auto* rep = app.add_subcommand("report", "Run the experiment matrix and write a summary table");
  rep->add_option("config", config_path, "Matrix config file (defaults when omitted)");

  for (auto* sub : {run_cmd, thr, ineq, fit, val, rep}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, g, out);
    if (thr->parsed()) {
      if (!gamma && (thr->count("--A") || thr->count("--rho"))) throw ConfigError("--A and --rho need --gamma");
      return cmd_thresholds(gamma, a_bound, rho, g, out);
    }
    if (ineq->parsed()) return cmd_inequalities(mixtures, balls, maxwellians, g, out);
    if (fit->parsed()) return cmd_fit(csv_path, fit_gamma, column, t_lo, t_hi, g, out);
    if (val->parsed()) return cmd_validate_model(config_path, g, out);
    if (rep->parsed()) return cmd_report(config_path, g, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InvariantError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace granular
