#include "granular/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "granular/dissipation.hpp"
#include "granular/error.hpp"
#include "granular/ode.hpp"
#include "granular/quadrature.hpp"

namespace granular {

void MomentVector::set(double p, double value) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("moment order must be finite and >= 0");
  if (!(value >= 0.0) || !std::isfinite(value)) throw DomainError("moments must be finite and >= 0");
  entries_[p] = value;
}

std::optional<double> MomentVector::find(double p) const {
  const auto it = entries_.find(p);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double MomentVector::at(double p) const {
  if (p < 0.0) throw std::logic_error("moment of negative order requested");
  const auto hi = entries_.lower_bound(p);
  if (hi != entries_.end() && hi->first == p) return hi->second;
  if (hi == entries_.end() || hi == entries_.begin()) {
    throw DomainError("moment order " + std::to_string(p) + " outside the stored range");
  }
  const auto lo = std::prev(hi);
  const double w = (p - lo->first) / (hi->first - lo->first);
  if (lo->second == 0.0 || hi->second == 0.0) return 0.0;
  return std::exp((1.0 - w) * std::log(lo->second) + w * std::log(hi->second));
}

bool MomentVector::satisfies_jensen(double rel_tol) const {
  for (const auto& [p, m] : entries_) {
    if (p <= 0.0) continue;
    const auto next = find(p + 0.5);
    if (!next) continue;
    const double bound = std::pow(m, 1.0 + 1.0 / (2.0 * p));
    if (*next < bound * (1.0 - rel_tol)) return false;
  }
  return true;
}

bool MomentVector::log_convex(double rel_tol) const {
  std::vector<std::pair<double, double>> v(entries_.begin(), entries_.end());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::size_t k = j + 1; k < v.size(); ++k) {
        const auto [p, mp] = v[i];
        const auto [q, mq] = v[j];
        const auto [r, mr] = v[k];
        if (mp <= 0 || mr <= 0) continue;
        const double bound = std::exp((r - q) / (r - p) * std::log(mp) + (q - p) / (r - p) * std::log(mr));
        if (mq > bound * (1.0 + rel_tol)) return false;
      }
  return true;
}

double maxwellian_moment(double theta, double p) {
  return std::pow(2.0 * theta, p) * std::tgamma(p + 1.5) / std::tgamma(1.5);
}

double kappa(double p) {
  if (!(p >= 1.0)) throw DomainError("kappa_p is defined for p >= 1");
  return 4.0 / (p + 1.0) * (1.0 - std::pow(0.75, p + 1.0) + std::pow(0.25, p + 1.0));
}

double kappa_quadrature(double p) {
  if (!(p >= 1.0)) throw DomainError("kappa_p is defined for p >= 1");
  auto f = [p](double t) { return std::pow((3.0 + t) / 4.0, p) + std::pow((1.0 - t) / 4.0, p); };
  return quad::integrate(f, 0.0, 1.0, 1e-14).value;
}

double binomial(double p, double k) {
  return std::exp(std::lgamma(p + 1.0) - std::lgamma(k + 1.0) - std::lgamma(p - k + 1.0));
}

double povzner_sum(const MomentVector& mv, double p) {
  const int kmax = int(std::floor((p + 1.0) / 2.0));
  double s = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    if (p - k < 0.0) throw std::logic_error("Povzner sum requested a negative moment order");
    s += binomial(p, k) * (mv.at(k + 0.5) * mv.at(p - k) + mv.at(k) * mv.at(p - k + 0.5));
  }
  return s;
}

double povzner_rhs(const MomentVector& mv, double p) {
  const double kp = kappa(p);
  double top;
  if (const auto stored = mv.find(p + 0.5)) {
    top = *stored;
  } else {
    const double q = mv.max_order();
    if (q <= 0.0) throw DomainError("Jensen closure needs a stored moment of positive order");
    top = std::pow(mv.at(q), (p + 0.5) / q);
  }
  return -(1.0 - kp) * top + kp * povzner_sum(mv, p);
}

std::vector<double> log_output_times(double t_first, double t_end, int per_decade) {
  if (!(t_end > 0) || !(t_first > 0) || per_decade <= 0) throw DomainError("log_output_times: bad arguments");
  std::vector<double> out{0.0};
  if (t_first >= t_end) {
    out.push_back(t_end);
    return out;
  }
  const double decades = std::log10(t_end / t_first);
  const auto count = std::size_t(std::ceil(decades * per_decade));
  for (std::size_t i = 0; i <= count; ++i) {
    const double t = t_first * std::pow(10.0, double(i) / per_decade);
    if (t >= t_end) break;
    out.push_back(t);
  }
  out.push_back(t_end);
  return out;
}

TimeSeries integrate_meanfield_energy(const RestitutionModel& model, double e0, std::span<const double> output_times) {
  if (!(e0 > 0.0) || !std::isfinite(e0)) throw DomainError("mean-field integration needs E0 > 0");
  auto rhs = [&model](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -psi(model, std::max(y[0], 0.0));
  };
  const auto samples = ode::integrate(rhs, {e0}, 0.0, output_times);
  TimeSeries ts({"t", "E"});
  for (const auto& s : samples) {
    const double row[2] = {s.t, s.y[0]};
    ts.append(row);
  }
  return ts;
}

TimeSeries integrate_meanfield_energy(const RestitutionModel& model, double e0, double t_end) {
  const auto times = log_output_times(1e-2, t_end);
  return integrate_meanfield_energy(model, e0, times);
}

double meanfield_constant_solution(double e_const, double e0, double t) {
  const double d = 1.0 + (1.0 - e_const * e_const) / 16.0 * std::sqrt(e0) * t;
  return e0 / (d * d);
}

HierarchyRun integrate_moment_hierarchy(const RestitutionModel& model, const MomentVector& mv0, double p_max,
                                        std::span<const double> output_times) {
  if (!mv0.unit_mass()) throw DomainError("moment hierarchy needs a unit-mass initial state (m_0 = 1)");
  if (!(p_max >= 1.5)) throw DomainError("moment hierarchy needs p_max >= 3/2");
  if (std::abs(2.0 * p_max - std::round(2.0 * p_max)) > 0) throw DomainError("p_max must be a half-integer");

  HierarchyRun run;
  for (double p = 1.0; p <= p_max + 1e-12; p += 0.5) run.evolved_orders.push_back(p);
  const auto& orders = run.evolved_orders;

  ode::State y0;
  for (double p : orders) {
    const auto v = mv0.find(p);
    if (!v || !(*v > 0.0)) throw DomainError("initial moment " + moment_label(p) + " missing or non-positive");
    y0.push_back(std::log(*v));
  }

  auto assemble = [&orders](std::span<const double> y) {
    MomentVector mv;
    for (std::size_t i = 0; i < orders.size(); ++i) mv.set(orders[i], std::exp(y[i]));
    return mv;
  };

  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const MomentVector mv = assemble(y);
    const double energy = mv.at(1.0);
    dy[0] = -psi(model, energy) / energy;
    for (std::size_t i = 1; i < orders.size(); ++i) {
      const double p = orders[i];
      // The damping moment is held above the log-convexity floor
      // m_{p+1/2} >= m_p^2 / m_{p-1/2}; without it the system drifts into
      // states no distribution can have and grows exponentially.
      const double jensen = mv.find(p + 0.5) ? *mv.find(p + 0.5) : std::pow(mv.at(p), 1.0 + 1.0 / (2.0 * p));
      const double top = std::max(jensen, mv.at(p) * mv.at(p) / mv.at(p - 0.5));
      const double kp = kappa(p);
      const double rate = -(1.0 - kp) * top + kp * povzner_sum(mv, p);
      if (!std::isfinite(rate)) throw NumericError("moment closure produced a non-finite value", p);
      dy[i] = rate / mv.at(p);
    }
  };

  const auto samples = ode::integrate(rhs, y0, 0.0, output_times);
  for (const auto& s : samples) {
    MomentVector mv = assemble(s.y);
    mv.time = s.t;
    run.trajectory.push_back(std::move(mv));
  }
  return run;
}

ThresholdReport constant_threshold() {
  ThresholdReport rep;
  rep.kappa_32 = kappa(1.5);
  rep.critical_e = std::sqrt(8.0 * rep.kappa_32 / 3.0 - 5.0 / 3.0);
  return rep;
}

bool satisfies_small_inelasticity(double e_const) {
  return 3.0 * (1.0 - e_const * e_const) / 8.0 < 1.0 - kappa(1.5);
}

ThresholdReport ell0_threshold(double gamma, double a_bound, double rho_t0) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("ell0_threshold needs gamma > 0");
  if (!(a_bound > 0.0) || !std::isfinite(a_bound)) throw DomainError("ell0_threshold needs A > 0");
  if (!(rho_t0 > 0.0) || !std::isfinite(rho_t0)) throw DomainError("ell0_threshold needs rho_t0 > 0");
  ThresholdReport rep = constant_threshold();
  rep.gamma = gamma;
  rep.c_gamma = std::pow(2.0, 3.0 + gamma) / (4.0 + gamma);
  rep.alpha = (1.0 - rep.kappa_32) / 2.0;
  // Positive root of -alpha X^2 + (1 + 3 c) X + 1 = 0.
  const double b = 1.0 + 3.0 * rep.c_gamma;
  rep.k0 = (b + std::sqrt(b * b + 4.0 * rep.alpha)) / (2.0 * rep.alpha);
  rep.k = std::max(rep.k0, rho_t0);
  rep.ell0 = 8.0 * rep.alpha / (9.0 * a_bound * rep.c_gamma * rep.k);
  if (rep.ell0 > 8.0) {
    rep.ell0 = 8.0;
    rep.ell0_capped = true;
  }
  return rep;
}

double controlled_cooling_constant(double gamma, double k_bound, double ell) {
  return std::pow(2.0, 3.0 + gamma) * k_bound * ell / (4.0 + gamma);
}

double haff_lower_envelope(double e_t0, double gamma, double c_gamma, double dt) {
  const double h = 0.5 * (1.0 + gamma);
  return e_t0 / std::pow(1.0 + h * std::pow(e_t0, h) * c_gamma * dt, 1.0 / h);
}

}  // namespace granular
