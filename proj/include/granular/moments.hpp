#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "granular/restitution.hpp"
#include "granular/time_series.hpp"

namespace granular {

/// Velocity moments m_p = int f |v|^{2p} dv at one time, keyed by p.
/// The zeroth moment is stored too and is 1 for a unit-mass state.
class MomentVector {
public:
  MomentVector() { entries_[0.0] = 1.0; }

  void set(double p, double value);
  std::optional<double> find(double p) const;
  /// Stored value, or the log-convex (Hoelder) interpolation between the
  /// nearest stored orders below and above p. Throws DomainError when p
  /// lies outside the stored range.
  double at(double p) const;
  double max_order() const { return entries_.rbegin()->first; }
  const std::map<double, double>& entries() const noexcept { return entries_; }

  bool unit_mass() const { return entries_.at(0.0) == 1.0; }
  /// m_{p+1/2} >= m_p^{1 + 1/(2p)} for consecutive stored half-integer orders.
  bool satisfies_jensen(double rel_tol = 1e-12) const;
  /// m_q <= m_p^{(r-q)/(r-p)} m_r^{(q-p)/(r-p)} for every stored p < q < r.
  bool log_convex(double rel_tol = 1e-12) const;

  double time = 0.0;

private:
  std::map<double, double> entries_;
};

/// Moments of the isotropic Gaussian with per-component variance theta:
/// m_p = (2 theta)^p Gamma(p + 3/2) / Gamma(3/2).
double maxwellian_moment(double theta, double p);

/// Povzner constant kappa_p = 4/(p+1) [1 - (3/4)^{p+1} + (1/4)^{p+1}], p >= 1.
double kappa(double p);
/// The same constant by adaptive quadrature of int_0^1 ((3+t)/4)^p + ((1-t)/4)^p dt.
double kappa_quadrature(double p);

/// Generalised binomial coefficient Gamma(p+1) / (Gamma(k+1) Gamma(p-k+1)).
double binomial(double p, double k);

/// S_p = sum_{k=1}^{floor((p+1)/2)} binom(p,k) (m_{k+1/2} m_{p-k} + m_k m_{p-k+1/2}).
double povzner_sum(const MomentVector& mv, double p);

/// Upper bound -(1 - kappa_p) m_{p+1/2} + kappa_p S_p on dm_p/dt. When
/// m_{p+1/2} is not stored it is replaced by the Jensen lower bound
/// m_q^{(p+1/2)/q} from the largest stored order q.
double povzner_rhs(const MomentVector& mv, double p);

/// Mean-field energy: dE/dt = -Psi_e(E), sampled at `output_times`
/// (non-decreasing, >= 0). Columns `t,E`.
TimeSeries integrate_meanfield_energy(const RestitutionModel& model, double e0, std::span<const double> output_times);
/// Same with the default output grid: t = 0 and 64 log-spaced points per
/// decade from 1e-2 to t_end.
TimeSeries integrate_meanfield_energy(const RestitutionModel& model, double e0, double t_end);

/// Closed form E0 / (1 + (1 - e^2) sqrt(E0) t / 16)^2 for a constant coefficient.
double meanfield_constant_solution(double e_const, double e0, double t);

/// Default log-spaced output times: 0, then `per_decade` points per decade from t_first to t_end.
std::vector<double> log_output_times(double t_first, double t_end, int per_decade = 64);

struct HierarchyRun {
  std::vector<MomentVector> trajectory;
  std::vector<double> evolved_orders;
  /// Always "upper bound only": the Povzner relation is integrated as an
  /// equality, so this is a bounding system rather than the true dynamics.
  std::string label = "upper bound only";
};

/// Integrates m_1 through dE/dt = -Psi_e(E) and m_p, p = 3/2, 2, ..., p_max,
/// through dm_p/dt = povzner_rhs(p), closing m_{p_max+1/2} by Jensen. The
/// damping moment m_{p+1/2} is floored at m_p^2 / m_{p-1/2}.
/// Requires a unit-mass mv0 holding m_1 .. m_{p_max} (positive). Works in
/// log variables so trajectories stay positive.
HierarchyRun integrate_moment_hierarchy(const RestitutionModel& model, const MomentVector& mv0, double p_max,
                                        std::span<const double> output_times);

struct ThresholdReport {
  double kappa_32 = 0.0;
  double critical_e = 0.0;
  // Variable-coefficient quantities (zero in the constant report).
  double gamma = 0.0;
  double c_gamma = 0.0;
  double alpha = 0.0;
  double k0 = 0.0;
  double k = 0.0;
  double ell0 = 0.0;
  bool ell0_capped = false;
};

/// kappa_{3/2} and the critical constant restitution sqrt(8 kappa_{3/2}/3 - 5/3).
ThresholdReport constant_threshold();
/// 3 (1 - e^2) / 8 < 1 - kappa_{3/2}.
bool satisfies_small_inelasticity(double e_const);

/// Weak-inelasticity threshold for gamma > 0, given the uniform bound A on
/// m_{2 gamma}^{1/3} and rho_t0 = m_{3/2}(t0) / E(t0)^{3/2}.
ThresholdReport ell0_threshold(double gamma, double a_bound, double rho_t0);

/// C_gamma = 2^{3+gamma} K ell_gamma / (4 + gamma).
double controlled_cooling_constant(double gamma, double k_bound, double ell);
/// Lower Haff envelope E(t0) / (1 + (1+gamma)/2 E(t0)^{(1+gamma)/2} C_gamma (t - t0))^{2/(1+gamma)}.
double haff_lower_envelope(double e_t0, double gamma, double c_gamma, double dt);

}  // namespace granular
