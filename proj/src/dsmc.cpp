#include "granular/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "granular/entropy.hpp"
#include "granular/error.hpp"

namespace granular {

void SimulationConfig::validate() const {
  if (particles < 2) throw ConfigError("particles must be >= 2");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive and finite");
  if (output_times.empty()) {
    if (!(t_first > 0.0 && t_first < t_end)) throw ConfigError("t_first must lie in (0, t_end)");
    if (points_per_decade < 1) throw ConfigError("points_per_decade must be >= 1");
  } else {
    for (std::size_t i = 0; i < output_times.size(); ++i) {
      if (!(output_times[i] >= 0.0) || output_times[i] > t_end) throw ConfigError("output_times must lie in [0, t_end]");
      if (i > 0 && !(output_times[i] > output_times[i - 1])) throw ConfigError("output_times must be strictly increasing");
    }
  }
  if (stop_energy_ratio && !(*stop_energy_ratio > 0.0 && *stop_energy_ratio < 1.0)) {
    throw ConfigError("stop_energy_ratio must lie in (0, 1)");
  }
  if (majorant_refresh < 1) throw ConfigError("majorant_refresh must be >= 1");
  if (moment_ps.empty()) throw ConfigError("moment_ps must not be empty");
  for (std::size_t i = 0; i < moment_ps.size(); ++i) {
    if (!(moment_ps[i] >= 0.0)) throw ConfigError("moment_ps must be non-negative");
    if (i > 0 && !(moment_ps[i] > moment_ps[i - 1])) throw ConfigError("moment_ps must be strictly increasing");
  }
  if (entropy_k != 0) {
    if (entropy_k < 3) throw ConfigError("entropy_k must be 0 (off) or >= 3");
    if (particles < 10 * std::size_t(entropy_k)) throw ConfigError("entropy estimate needs particles >= 10 entropy_k");
  }
  if (!(collisions_per_step > 0.0 && collisions_per_step <= 1.0)) throw ConfigError("collisions_per_step must lie in (0, 1]");
  std::visit(
      [](const auto& init) {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, MaxwellianInit>) {
          if (!(init.theta > 0.0)) throw ConfigError("init theta must be positive");
        } else if constexpr (std::is_same_v<T, UniformBallInit>) {
          if (!(init.radius > 0.0)) throw ConfigError("init radius must be positive");
        } else {
          if (!(init.theta1 > 0.0 && init.theta2 > 0.0)) throw ConfigError("init temperatures must be positive");
          if (!(init.mix >= 0.0 && init.mix <= 1.0)) throw ConfigError("init mix must lie in [0, 1]");
        }
      },
      init);
}

std::vector<double> SimulationConfig::resolved_output_times() const {
  if (!output_times.empty()) return output_times;
  return log_output_times(t_first, t_end, points_per_decade);
}

double ParticleEnsemble::energy() const {
  double s = 0;
  for (const auto& v : velocities) s += norm2(v);
  return s / double(velocities.size());
}

Vec3 ParticleEnsemble::mean_velocity() const {
  Vec3 m;
  for (const auto& v : velocities) m += v;
  return (1.0 / double(velocities.size())) * m;
}

double ParticleEnsemble::max_speed() const {
  double m = 0;
  for (const auto& v : velocities) m = std::max(m, norm2(v));
  return std::sqrt(m);
}

ParticleEnsemble init_ensemble(const SimulationConfig& config) {
  config.validate();
  ParticleEnsemble ens;
  ens.rng.seed(config.seed);
  ens.velocities.resize(config.particles);
  auto& rng = ens.rng;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (auto& v : ens.velocities) {
    std::visit(
        [&](const auto& init) {
          using T = std::decay_t<decltype(init)>;
          if constexpr (std::is_same_v<T, MaxwellianInit>) {
            const double s = std::sqrt(init.theta);
            v = {s * gauss(rng), s * gauss(rng), s * gauss(rng)};
          } else if constexpr (std::is_same_v<T, UniformBallInit>) {
            do {
              v = {unit(rng), unit(rng), unit(rng)};
            } while (norm2(v) > 1.0);
            v *= init.radius;
          } else {
            const double theta = u01(rng) < init.mix ? init.theta1 : init.theta2;
            const double s = std::sqrt(theta);
            v = {s * gauss(rng), s * gauss(rng), s * gauss(rng)};
          }
        },
        config.init);
  }
  const Vec3 mean = ens.mean_velocity();
  for (auto& v : ens.velocities) v -= mean;
  return ens;
}

Vec3 sample_direction(const Vec3& u, Rng& rng) {
  const double r = norm(u);
  if (!(r > 0.0)) throw DomainError("sample_direction needs |u| > 0");
  const Vec3 w = (1.0 / r) * u;
  // Orthonormal frame (a, b, w).
  const Vec3 helper = std::abs(w.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 a = cross(helper, w);
  a *= 1.0 / norm(a);
  const Vec3 b = cross(w, a);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double cos_t = std::sqrt(u01(rng));
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = 2.0 * std::numbers::pi * u01(rng);
  return cos_t * w + (sin_t * std::cos(phi)) * a + (sin_t * std::sin(phi)) * b;
}

CollisionOutcome collide_pair(const Vec3& v, const Vec3& v_star, const Vec3& n, const RestitutionModel& model) {
  const double un = dot(v - v_star, n);
  const double e = model.e(std::abs(un));
  const Vec3 dv = (0.5 * (1.0 + e) * un) * n;
  return {v - dv, v_star + dv, e, un};
}

NtcStepper::NtcStepper(RestitutionModel model, int majorant_refresh)
    : model_(std::move(model)), refresh_every_(std::max(1, majorant_refresh)) {}

void NtcStepper::refresh_majorant(const ParticleEnsemble& ensemble) { g_max_ = 2.0 * ensemble.max_speed(); }

StepStats NtcStepper::step(ParticleEnsemble& ens, double dt) {
  if (!(dt > 0.0)) throw DomainError("step needs dt > 0");
  const std::size_t n = ens.size();
  if (n < 2) throw DomainError("step needs at least two particles");
  if (g_max_ < 0.0 || steps_ % std::uint64_t(refresh_every_) == 0) refresh_majorant(ens);
  ++steps_;

  StepStats st;
  if (!(g_max_ > 0.0)) return st;  // all particles at rest
  auto& rng = ens.rng;
  // Each unordered pair is a candidate at rate g_max / N, so the expected
  // candidate count is N (N - 1) / 2 * g_max / N * dt.
  std::poisson_distribution<std::uint64_t> count(0.5 * double(n - 1) * g_max_ * dt);
  std::uniform_int_distribution<std::size_t> pick_i(0, n - 1), pick_j(0, n - 2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double inv_n = 1.0 / double(n);

  st.candidates = count(rng);
  for (std::uint64_t c = 0; c < st.candidates; ++c) {
    const std::size_t i = pick_i(rng);
    std::size_t j = pick_j(rng);
    if (j >= i) ++j;
    Vec3& v = ens.velocities[i];
    Vec3& w = ens.velocities[j];
    const Vec3 u = v - w;
    const double speed = norm(u);
    if (speed == 0.0) continue;
    bool breach = false;
    if (speed > g_max_) {
      breach = true;
    } else if (!(u01(rng) * g_max_ < speed)) {
      continue;
    }
    const Vec3 nhat = sample_direction(u, rng);
    const double before = norm2(v) + norm2(w);
    const CollisionOutcome out = collide_pair(v, w, nhat, model_);
    v = out.v;
    w = out.v_star;
    st.energy_change += (norm2(v) + norm2(w) - before) * inv_n;
    ++st.accepted;
    ++ens.collisions;
    if (breach) {
      ++st.breaches;
      ++breaches_;
      refresh_majorant(ens);
    }
  }
  ens.time += dt;
  return st;
}

MomentVector measure_moments(const ParticleEnsemble& ensemble, std::span<const double> ps) {
  if (ps.empty()) throw DomainError("measure_moments needs at least one order");
  std::vector<double> sums(ps.size(), 0.0);
  for (const auto& v : ensemble.velocities) {
    const double s2 = norm2(v);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double p = ps[k];
      if (p == 0.0) sums[k] += 1.0;
      else if (p == 1.0) sums[k] += s2;
      else if (p == 0.5) sums[k] += std::sqrt(s2);
      else if (p == 1.5) sums[k] += s2 * std::sqrt(s2);
      else if (p == 2.0) sums[k] += s2 * s2;
      else sums[k] += std::pow(s2, p);
    }
  }
  MomentVector m;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (ps[k] != 0.0) m.set(ps[k], sums[k] / double(ensemble.size()));
  }
  m.time = ensemble.time;
  return m;
}

std::vector<std::string> run_columns(const SimulationConfig& config) {
  std::vector<std::string> names{"t", "E"};
  for (double p : config.moment_ps) names.push_back(moment_label(p));
  if (config.entropy_k > 0) names.push_back("entropy");
  names.push_back("collisions");
  return names;
}

TimeSeries run(const SimulationConfig& config, RunInfo* info, TimeSeries* partial) {
  const std::vector<double> times = config.resolved_output_times();
  ParticleEnsemble ens = init_ensemble(config);
  NtcStepper stepper(config.model, config.majorant_refresh);
  TimeSeries series(run_columns(config));
  RunInfo local;
  RunInfo& ri = info ? *info : local;
  ri = RunInfo{};
  ri.initial_energy = ens.energy();

  std::vector<double> row;
  auto record = [&](std::size_t index) {
    const double e = ens.energy();
    if (!std::isfinite(e)) throw NumericError("DSMC energy became non-finite", e);
    row.clear();
    row.push_back(ens.time);
    row.push_back(e);
    const MomentVector m = measure_moments(ens, config.moment_ps);
    for (double p : config.moment_ps) row.push_back(p == 0.0 ? 1.0 : m.at(p));
    if (config.entropy_k > 0) {
      const std::uint64_t s = config.seed ^ (0x9e3779b97f4a7c15ULL * (std::uint64_t(index) + 1));
      row.push_back(entropy_knn(ens.velocities, config.entropy_k, s).h_signed);
    }
    row.push_back(double(ens.collisions));
    series.append(row);
    return e;
  };

  try {
    double energy = ri.initial_energy;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double target = times[k];
      while (ens.time < target) {
        double dt = config.collisions_per_step / std::sqrt(2.0 * std::max(energy, 1e-300));
        const double remaining = target - ens.time;
        // Land exactly on the output time; avoid a sliver step right after.
        bool last = false;
        if (dt >= remaining * (1.0 - 1e-12)) {
          dt = remaining;
          last = true;
        } else if (dt > 0.5 * remaining) {
          dt = 0.5 * remaining;
        }
        const StepStats st = stepper.step(ens, dt);
        energy += st.energy_change;
        ++ri.steps;
        if (last) ens.time = target;
        if (ri.steps % 64 == 0) energy = ens.energy();
      }
      energy = record(k);
      if (config.stop_energy_ratio && energy <= *config.stop_energy_ratio * ri.initial_energy) {
        ri.stopped_on_energy = true;
        break;
      }
    }
  } catch (const NumericError&) {
    ri.breaches = stepper.total_breaches();
    if (partial) *partial = series;
    throw;
  }
  ri.breaches = stepper.total_breaches();
  return series;
}

}  // namespace granular
