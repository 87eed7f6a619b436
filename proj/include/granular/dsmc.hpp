#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "granular/moments.hpp"
#include "granular/restitution.hpp"
#include "granular/time_series.hpp"
#include "granular/vec3.hpp"

namespace granular {

using Rng = std::mt19937_64;

/// Isotropic Gaussian, per-component variance theta (E = 3 theta).
struct MaxwellianInit {
  double theta = 1.0 / 3.0;
};
/// Uniform density on the ball of radius R (E = 3 R^2 / 5).
struct UniformBallInit {
  double radius = 1.0;
};
/// Mixture of two Gaussians: fraction `mix` at theta1, the rest at theta2.
struct TwoTemperatureInit {
  double theta1 = 1.0;
  double theta2 = 0.1;
  double mix = 0.5;
};
using InitialCondition = std::variant<MaxwellianInit, UniformBallInit, TwoTemperatureInit>;

struct SimulationConfig {
  std::size_t particles = 100000;
  RestitutionModel model = RestitutionModel::constant(1.0);
  InitialCondition init = MaxwellianInit{};
  double t_end = 1.0;
  /// First positive output time of the default log-spaced grid.
  double t_first = 1e-2;
  int points_per_decade = 64;
  /// Explicit output times; when empty the log-spaced default is used.
  std::vector<double> output_times;
  /// Stop at the first output time where E <= ratio * E(0).
  std::optional<double> stop_energy_ratio;
  std::uint64_t seed = 1;
  int majorant_refresh = 64;
  std::vector<double> moment_ps = {0.5, 1.0, 1.5, 2.0};
  /// Neighbour count of the entropy estimator; 0 disables the entropy column.
  int entropy_k = 5;
  /// Upper bound on the expected collisions per particle per step.
  double collisions_per_step = 0.1;

  /// Throws ConfigError on violated invariants.
  void validate() const;
  std::vector<double> resolved_output_times() const;
};

/// Empirical measure of N equal-weight particles plus its RNG stream.
struct ParticleEnsemble {
  std::vector<Vec3> velocities;
  Rng rng;
  double time = 0.0;
  std::uint64_t collisions = 0;

  std::size_t size() const noexcept { return velocities.size(); }
  double energy() const;
  Vec3 mean_velocity() const;
  double max_speed() const;
};

/// Samples the configured family and recentres it to zero mean velocity.
ParticleEnsemble init_ensemble(const SimulationConfig& config);

/// Impact direction on the hemisphere n.u > 0 with density proportional to
/// |u.n| (cos theta = sqrt(U)). Requires |u| > 0.
Vec3 sample_direction(const Vec3& u, Rng& rng);

struct CollisionOutcome {
  Vec3 v;
  Vec3 v_star;
  double restitution;  // e(|u.n|)
  double normal_speed;  // u.n before the collision
};

/// Inelastic collision rule v' = v - (1+e)/2 (u.n) n, v*' = v* + (1+e)/2 (u.n) n.
CollisionOutcome collide_pair(const Vec3& v, const Vec3& v_star, const Vec3& n, const RestitutionModel& model);

struct StepStats {
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t breaches = 0;
  double energy_change = 0.0;  // sum over collisions of (|v'|^2 + |v*'|^2 - |v|^2 - |v*|^2) / N
};

/// No-time-counter stepping for the spatially homogeneous equation: the
/// whole ensemble is a single cell and every unordered pair collides at
/// rate |u_ij| / N.
class NtcStepper {
public:
  NtcStepper(RestitutionModel model, int majorant_refresh = 64);

  StepStats step(ParticleEnsemble& ensemble, double dt);
  /// Forces g_max = 2 max|v| now.
  void refresh_majorant(const ParticleEnsemble& ensemble);
  double majorant() const noexcept { return g_max_; }
  std::uint64_t total_breaches() const noexcept { return breaches_; }

private:
  RestitutionModel model_;
  int refresh_every_;
  std::uint64_t steps_ = 0;
  std::uint64_t breaches_ = 0;
  double g_max_ = -1.0;
};

MomentVector measure_moments(const ParticleEnsemble& ensemble, std::span<const double> ps);

struct RunInfo {
  std::uint64_t steps = 0;
  std::uint64_t breaches = 0;
  double initial_energy = 0.0;
  bool stopped_on_energy = false;
};

/// Column names of a run: t,E,m_<p>...,entropy,collisions.
std::vector<std::string> run_columns(const SimulationConfig& config);

/// Full DSMC run. Rows are recorded at every output time up to t_end (or
/// the energy stop). Deterministic in the seed. If a numeric error aborts
/// the run, `partial` (when given) holds the rows recorded so far.
TimeSeries run(const SimulationConfig& config, RunInfo* info = nullptr, TimeSeries* partial = nullptr);

}  // namespace granular
