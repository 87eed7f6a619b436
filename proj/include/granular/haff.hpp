#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "granular/time_series.hpp"

namespace granular {

/// Closed time interval used by the fits; rows with t in [t_lo, t_hi] take part.
struct TimeWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Last 60% of the log(1+t) range of the series.
TimeWindow default_window(const TimeSeries& series);

struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;  // RMS of log residuals
  std::size_t n_points = 0;
};

/// Least squares of log(value) on log(1+t). Throws DomainError for fewer
/// than 8 points in the window or non-positive values.
DecayFit fit_decay(const TimeSeries& series, const std::string& column = "E",
                   std::optional<TimeWindow> window = std::nullopt);

struct SandwichCheck {
  double c_hat = 0.0;
  double C_hat = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

/// Extremes of E (1+t)^{2/(1+gamma)} over the window.
SandwichCheck check_sandwich(const TimeSeries& series, double gamma, std::optional<TimeWindow> window = std::nullopt,
                             double ratio_bound = 10.0);

struct MomentScalingCheck {
  double K_hat = 0.0;
  double trend = 0.0;  // relative increase of the running max over the last decade
  bool pass = false;
};

/// Running max of m_p / E^p; passes when it grows by at most 20% over the last decade of t.
MomentScalingCheck check_moment_scaling(const TimeSeries& series, double p,
                                        std::optional<TimeWindow> window = std::nullopt);

struct EntropyGrowthCheck {
  double slope = 0.0;  // linear fit of H against log(1+t)
  double curvature = 0.0;
  double curvature_stderr = 0.0;
  double p_value = 1.0;  // one-sided, H1: curvature > 0
  std::size_t n_points = 0;
  bool pass = false;
};

/// Quadratic fit of the entropy column on log(1+t); fails when the
/// curvature is positive at 5% significance.
EntropyGrowthCheck check_entropy_growth(const TimeSeries& series, const std::string& column = "entropy",
                                        std::optional<TimeWindow> window = std::nullopt);

struct IntegratedHaffCheck {
  double liminf_ratio = 0.0;  // min over the last decade of I(t) / log(1+t)
  double max_ratio = 0.0;
  bool pass = false;
};

/// I(t) = int_0^t sqrt(E) ds by the trapezoid rule; passes when I / log(1+t)
/// stays positive with max/min <= 1.2 over the last decade.
IntegratedHaffCheck check_integrated_haff(const TimeSeries& series);

struct MatrixConfig {
  std::vector<double> constant_e = {0.3, 0.5, 0.8, 0.9, 0.95};
  std::vector<double> viscoelastic_a = {0.5, 1.0, 2.0};
  std::size_t particles = 100000;
  double energy_drop = 1e-3;
  double t_max = 1e7;
  int entropy_k = 5;
  std::uint64_t seed = 1;
  /// Per-run CSVs are written here when non-empty.
  std::string out_dir;
};

struct MatrixRow {
  std::string run_id;
  std::string model;
  double gamma = 0.0;
  double theory_exp = 0.0;
  double fitted_exp = 0.0;
  double residual = 0.0;
  double c_hat = 0.0;
  double C_hat = 0.0;
  std::string threshold_verdict;
  double entropy_slope = 0.0;
  double meanfield_exp = 0.0;
  bool below_meanfield = false;  // DSMC E <= mean-field E + 3/sqrt(N) pointwise
  std::string error;             // set when the run failed
  std::vector<std::string> files;
};

/// Runs DSMC plus the mean-field ODE for every configured model. Failures
/// are recorded in the row and the matrix continues.
std::vector<MatrixRow> experiment_matrix(const MatrixConfig& config, std::ostream* log = nullptr);

/// Header `run_id,model,gamma,theory_exp,fitted_exp,residual,c_hat,C_hat,threshold_verdict,entropy_slope`.
void write_summary_csv(const std::vector<MatrixRow>& rows, std::ostream& os);

}  // namespace granular
