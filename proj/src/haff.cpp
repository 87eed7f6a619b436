#include "granular/haff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "granular/dsmc.hpp"
#include "granular/error.hpp"
#include "granular/moments.hpp"
#include "granular/restitution.hpp"
#include "granular/stats.hpp"

namespace granular {

namespace {

std::vector<std::size_t> rows_in(const TimeSeries& s, const TimeWindow& w) {
  std::vector<std::size_t> idx;
  const auto& t = s.time();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= w.t_lo && t[i] <= w.t_hi) idx.push_back(i);
  return idx;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

TimeWindow default_window(const TimeSeries& series) {
  const auto& t = series.time();
  if (t.empty()) throw DomainError("empty series");
  const double l_lo = std::log1p(t.front()), l_hi = std::log1p(t.back());
  return {std::expm1(l_lo + 0.4 * (l_hi - l_lo)), t.back()};
}

DecayFit fit_decay(const TimeSeries& series, const std::string& column, std::optional<TimeWindow> window) {
  const TimeWindow w = window.value_or(default_window(series));
  const auto idx = rows_in(series, w);
  if (idx.size() < 8) throw DomainError("fit_decay needs at least 8 points in the window");
  const auto& t = series.time();
  const auto& v = series.column(column);
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    if (!(v[i] > 0.0)) throw DomainError("fit_decay needs positive values in the window");
    x.push_back(std::log1p(t[i]));
    y.push_back(std::log(v[i]));
  }
  const LineFit f = fit_line(x, y);
  return {f.slope, std::exp(f.intercept), t[idx.front()], t[idx.back()], f.rms_residual, idx.size()};
}

SandwichCheck check_sandwich(const TimeSeries& series, double gamma, std::optional<TimeWindow> window,
                             double ratio_bound) {
  const TimeWindow w = window.value_or(default_window(series));
  const auto& t = series.time();
  const auto& e = series.column("E");
  const double q = 2.0 / (1.0 + gamma);
  SandwichCheck out;
  out.c_hat = std::numeric_limits<double>::infinity();
  out.C_hat = -std::numeric_limits<double>::infinity();
  for (std::size_t i : rows_in(series, w)) {
    const double s = e[i] * std::pow(1.0 + t[i], q);
    out.c_hat = std::min(out.c_hat, s);
    out.C_hat = std::max(out.C_hat, s);
  }
  out.ratio = out.C_hat / out.c_hat;
  out.pass = std::isfinite(out.c_hat) && std::isfinite(out.C_hat) && out.c_hat > 0.0 && out.ratio <= ratio_bound;
  return out;
}

MomentScalingCheck check_moment_scaling(const TimeSeries& series, double p, std::optional<TimeWindow> window) {
  const TimeWindow w = window.value_or(default_window(series));
  const auto& t = series.time();
  const auto& e = series.column("E");
  const auto& m = series.column(moment_label(p));
  MomentScalingCheck out;
  double running = 0.0, running_at_start = -1.0;
  const double t_decade = t.back() / 10.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = m[i] / std::pow(e[i], p);
    running = std::max(running, r);
    if (t[i] <= t_decade) running_at_start = running;
    if (t[i] >= w.t_lo && t[i] <= w.t_hi) out.K_hat = std::max(out.K_hat, r);
  }
  if (running_at_start <= 0.0) return out;
  out.trend = running / running_at_start - 1.0;
  out.pass = std::isfinite(out.trend) && out.trend <= 0.2;
  return out;
}

EntropyGrowthCheck check_entropy_growth(const TimeSeries& series, const std::string& column,
                                        std::optional<TimeWindow> window) {
  const TimeWindow w = window.value_or(default_window(series));
  const auto idx = rows_in(series, w);
  EntropyGrowthCheck out;
  out.n_points = idx.size();
  if (idx.size() < 8) throw DomainError("check_entropy_growth needs at least 8 points in the window");
  const auto& t = series.time();
  const auto& h = series.column(column);
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    x.push_back(std::log1p(t[i]));
    y.push_back(h[i]);
  }
  out.slope = fit_line(x, y).slope;
  const QuadraticFit q = fit_quadratic(x, y);
  out.curvature = q.c2;
  out.curvature_stderr = q.c2_stderr;
  // Curvature at rounding level is no evidence of a trend.
  const double negligible = 1e-9 * (1.0 + std::abs(q.c1));
  if (q.c2 <= negligible) {
    out.p_value = q.c2 <= 0.0 ? 1.0 : 0.5;
  } else if (q.c2_stderr == 0.0) {
    out.p_value = 0.0;
  } else {
    const boost::math::students_t dist(double(q.n - 3));
    out.p_value = boost::math::cdf(boost::math::complement(dist, q.c2 / q.c2_stderr));
  }
  out.pass = !(q.c2 > negligible && out.p_value < 0.05);
  return out;
}

IntegratedHaffCheck check_integrated_haff(const TimeSeries& series) {
  const auto& t = series.time();
  const auto& e = series.column("E");
  IntegratedHaffCheck out;
  if (t.size() < 2) return out;
  double integral = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const double t_decade = t.back() / 10.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) integral += 0.5 * (t[i] - t[i - 1]) * (std::sqrt(e[i]) + std::sqrt(e[i - 1]));
    if (t[i] >= t_decade && t[i] > 0.0) {
      const double r = integral / std::log1p(t[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  out.liminf_ratio = lo;
  out.max_ratio = hi;
  out.pass = std::isfinite(lo) && lo > 0.0 && hi / lo <= 1.2;
  return out;
}

std::vector<MatrixRow> experiment_matrix(const MatrixConfig& config, std::ostream* log) {
  struct Plan {
    std::string id;
    RestitutionModel model;
    double gamma;
  };
  std::vector<Plan> plans;
  for (double e : config.constant_e) plans.push_back({"const_e" + fmt("%g", e), RestitutionModel::constant(e), 0.0});
  for (double a : config.viscoelastic_a) {
    plans.push_back({"visco_a" + fmt("%g", a), RestitutionModel::viscoelastic(a), 0.2});
  }
  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  std::vector<MatrixRow> rows;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const Plan& plan = plans[k];
    MatrixRow row;
    row.run_id = plan.id;
    row.model = plan.model.describe();
    row.gamma = plan.gamma;
    row.theory_exp = -2.0 / (1.0 + plan.gamma);
    try {
      SimulationConfig sim;
      sim.particles = config.particles;
      sim.model = plan.model;
      sim.t_end = config.t_max;
      sim.stop_energy_ratio = config.energy_drop;
      sim.seed = config.seed + k;
      sim.entropy_k = config.entropy_k;
      if (plan.gamma > 0.0) sim.moment_ps = {2.0 * plan.gamma, 0.5, 1.0, 1.5, 2.0};
      const TimeSeries dsmc = run(sim);

      const DecayFit fit = fit_decay(dsmc);
      row.fitted_exp = fit.exponent;
      row.residual = fit.residual;
      const SandwichCheck sw = check_sandwich(dsmc, plan.gamma);
      row.c_hat = sw.c_hat;
      row.C_hat = sw.C_hat;
      if (dsmc.has("entropy")) row.entropy_slope = check_entropy_growth(dsmc).slope;

      const TimeSeries mf = integrate_meanfield_energy(plan.model, dsmc.column("E").front(), dsmc.time());
      row.meanfield_exp = fit_decay(mf).exponent;
      row.below_meanfield = true;
      const double tol = 3.0 / std::sqrt(double(config.particles));
      for (std::size_t i = 0; i < dsmc.rows(); ++i) {
        if (dsmc.column("E")[i] > mf.column("E")[i] + tol) row.below_meanfield = false;
      }

      if (plan.model.is_constant()) {
        const double e = std::get<ConstantRestitution>(plan.model.kind()).e0;
        const ThresholdReport th = constant_threshold();
        row.threshold_verdict = std::string(satisfies_small_inelasticity(e) ? "above" : "below") + " critical " +
                                fmt("%.3f", th.critical_e);
      } else {
        const auto& m_small = dsmc.column(moment_label(2.0 * plan.gamma));
        double a_bound = 0.0;
        for (double m : m_small) a_bound = std::max(a_bound, std::cbrt(m));
        const double rho = dsmc.column("m_1.5").front() / std::pow(dsmc.column("E").front(), 1.5);
        const ThresholdReport th = ell0_threshold(plan.gamma, a_bound, rho);
        const double ell = ell_gamma(plan.model, plan.gamma, default_grid());
        row.threshold_verdict = (ell < th.ell0 ? "weak: ell " : "not weak: ell ") + fmt("%.4g", ell) +
                                (ell < th.ell0 ? " < ell0 " : " >= ell0 ") + fmt("%.4g", th.ell0);
      }

      if (!config.out_dir.empty()) {
        const std::string base = config.out_dir + "/" + plan.id;
        dsmc.write_csv(base + "_dsmc.csv");
        mf.write_csv(base + "_meanfield.csv");
        row.files = {base + "_dsmc.csv", base + "_meanfield.csv"};
      }
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    if (log) {
      *log << row.run_id << ": " << (row.error.empty() ? "fitted " + fmt("%.4f", row.fitted_exp) : "failed: " + row.error)
           << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(const std::vector<MatrixRow>& rows, std::ostream& os) {
  os << "run_id,model,gamma,theory_exp,fitted_exp,residual,c_hat,C_hat,threshold_verdict,entropy_slope\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& r : rows) {
    const std::string verdict = r.error.empty() ? r.threshold_verdict : "error: " + r.error;
    os << quote(r.run_id) << ',' << quote(r.model) << ',' << format_double(r.gamma) << ','
       << format_double(r.theory_exp) << ',' << format_double(r.error.empty() ? r.fitted_exp : std::nan("")) << ','
       << format_double(r.residual) << ',' << format_double(r.c_hat) << ',' << format_double(r.C_hat) << ','
       << quote(verdict) << ',' << format_double(r.entropy_slope) << '\n';
  }
}

}  // namespace granular
