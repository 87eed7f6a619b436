#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "granular/dsmc.hpp"
#include "granular/error.hpp"

using namespace granular;

namespace {

SimulationConfig small_config(double e, std::size_t n = 2000) {
  SimulationConfig c;
  c.particles = n;
  c.model = RestitutionModel::constant(e);
  c.t_end = 5.0;
  c.t_first = 0.1;
  c.points_per_decade = 8;
  c.entropy_k = 0;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  SimulationConfig c = small_config(0.9);
  CHECK_NOTHROW(c.validate());
  c.particles = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(0.9);
  c.t_end = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(0.9);
  c.output_times = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(0.9);
  c.entropy_k = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("maxwellian initial ensemble") {
  SimulationConfig c = small_config(0.9, 100000);
  const ParticleEnsemble ens = init_ensemble(c);
  const Vec3 mean = ens.mean_velocity();
  CHECK(std::abs(mean.x) < 1e-12);
  CHECK(std::abs(mean.y) < 1e-12);
  CHECK(std::abs(mean.z) < 1e-12);
  CHECK(std::abs(ens.energy() - 1.0) < 3.0 / std::sqrt(double(c.particles)));
  const ParticleEnsemble again = init_ensemble(c);
  CHECK(again.velocities == ens.velocities);

  c.init = UniformBallInit{2.0};
  const ParticleEnsemble ball = init_ensemble(c);
  CHECK(ball.energy() == doctest::Approx(0.6 * 4.0).epsilon(0.02));
  c.init = TwoTemperatureInit{1.0, 0.1, 0.25};
  const ParticleEnsemble two = init_ensemble(c);
  CHECK(two.energy() == doctest::Approx(3.0 * (0.25 * 1.0 + 0.75 * 0.1)).epsilon(0.03));
}

TEST_CASE("impact directions: hemisphere, E[cos] = 2/3, uniform azimuth") {
  Rng rng(3);
  const Vec3 u{0.3, -1.2, 0.5};
  const Vec3 w = (1.0 / norm(u)) * u;
  // Frame used to read the azimuth back.
  Vec3 a = cross(Vec3{1, 0, 0}, w);
  a *= 1.0 / norm(a);
  const Vec3 b = cross(w, a);
  const int n = 1000000;
  double mean_cos = 0;
  std::vector<double> phi;
  phi.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 nh = sample_direction(u, rng);
    const double c = dot(nh, w);
    REQUIRE(c > 0.0);
    CHECK(std::abs(norm(nh) - 1.0) < 1e-14);
    mean_cos += c;
    double ph = std::atan2(dot(nh, b), dot(nh, a));
    if (ph < 0) ph += 2.0 * std::numbers::pi;
    phi.push_back(ph / (2.0 * std::numbers::pi));
  }
  mean_cos /= n;
  // sd of cos under density 2 c dc is sqrt(1/2 - 4/9)
  CHECK(std::abs(mean_cos - 2.0 / 3.0) < 5.0 * std::sqrt(0.5 - 4.0 / 9.0) / std::sqrt(double(n)));

  std::sort(phi.begin(), phi.end());
  double d = 0;
  for (int i = 0; i < n; ++i) d = std::max({d, std::abs((i + 1.0) / n - phi[i]), std::abs(phi[i] - double(i) / n)});
  // Kolmogorov-Smirnov critical value at the 1% level.
  CHECK(d * std::sqrt(double(n)) < 1.628);

  CHECK_THROWS_AS(sample_direction(Vec3{}, rng), DomainError);
}

TEST_CASE("hand-evaluated collision") {
  const auto out = collide_pair({1, 0, 0}, {-1, 0, 0}, {1, 0, 0}, RestitutionModel::constant(0.5));
  CHECK(out.v.x == doctest::Approx(-0.5));
  CHECK(out.v_star.x == doctest::Approx(0.5));
  CHECK(dot(out.v - out.v_star, Vec3{1, 0, 0}) == doctest::Approx(-1.0));
  const auto graze = collide_pair({1, 2, 0}, {1, -1, 0}, {1, 0, 0}, RestitutionModel::constant(0.5));
  CHECK(graze.v == Vec3{1, 2, 0});
  CHECK(graze.v_star == Vec3{1, -1, 0});
  const auto el = collide_pair({0.3, 1, -2}, {-1, 0.5, 0.25}, {0.6, 0.8, 0}, RestitutionModel::constant(1.0));
  CHECK(norm2(el.v) + norm2(el.v_star) == doctest::Approx(norm2(Vec3{0.3, 1, -2}) + norm2(Vec3{-1, 0.5, 0.25})));
}

TEST_CASE("elastic stepping conserves energy") {
  SimulationConfig c = small_config(1.0);
  ParticleEnsemble ens = init_ensemble(c);
  const double e0 = ens.energy();
  NtcStepper st(c.model);
  std::uint64_t accepted = 0;
  for (int i = 0; i < 200; ++i) accepted += st.step(ens, 0.05).accepted;
  CHECK(accepted > 0);
  CHECK(std::abs(ens.energy() / e0 - 1.0) < 1e-12);
}

TEST_CASE("inelastic step dissipates and conserves momentum") {
  SimulationConfig c = small_config(0.5);
  ParticleEnsemble ens = init_ensemble(c);
  NtcStepper st(c.model);
  for (int i = 0; i < 20; ++i) {
    const double before = ens.energy();
    const StepStats s = st.step(ens, 0.05);
    if (s.accepted > 0) {
      CHECK(ens.energy() < before);
      CHECK(s.energy_change < 0.0);
      CHECK(ens.energy() - before == doctest::Approx(s.energy_change).epsilon(1e-9));
    }
  }
  const Vec3 m = ens.mean_velocity();
  CHECK(norm(m) < 1e-14);
  CHECK(ens.collisions > 0);
}

TEST_CASE("two particles: a single accepted collision equals collide_pair") {
  ParticleEnsemble ens;
  ens.velocities = {{1.0, 0.2, 0.0}, {-1.0, -0.2, 0.0}};
  ens.rng.seed(5);
  NtcStepper st(RestitutionModel::constant(0.7));
  ParticleEnsemble before = ens;
  while (ens.collisions == 0) {
    before = ens;
    st.step(ens, 0.2);
  }
  REQUIRE(ens.collisions == 1);
  CHECK(norm(ens.velocities[0] + ens.velocities[1]) < 1e-15);
  const Vec3 u = before.velocities[0] - before.velocities[1];
  const Vec3 du = (ens.velocities[0] - ens.velocities[1]) - u;
  const Vec3 n = (1.0 / norm(du)) * du;
  const auto expect = collide_pair(before.velocities[0], before.velocities[1], n, RestitutionModel::constant(0.7));
  CHECK(norm(expect.v - ens.velocities[0]) < 1e-12);
  CHECK(norm(expect.v_star - ens.velocities[1]) < 1e-12);
}

TEST_CASE("measured moments") {
  ParticleEnsemble ens;
  ens.velocities.assign(10, Vec3{2, 0, 0});
  const std::vector<double> ps{0.5, 1.0, 1.5};
  const MomentVector m = measure_moments(ens, ps);
  CHECK(m.at(1.5) == doctest::Approx(8.0));
  CHECK(m.at(0.0) == 1.0);

  SimulationConfig c = small_config(0.9, 100000);
  const ParticleEnsemble g = init_ensemble(c);
  const std::vector<double> qs{0.5, 1.0, 1.5, 2.0};
  const MomentVector mg = measure_moments(g, qs);
  CHECK(std::abs(mg.at(1.0) - 1.0) < 5.0 / std::sqrt(double(c.particles)));
  CHECK(mg.at(1.5) >= std::pow(mg.at(1.0), 4.0 / 3.0));
  CHECK(mg.log_convex());
}

TEST_CASE("run: monotone energy, log-convex moments, deterministic CSV") {
  SimulationConfig c = small_config(0.8, 5000);
  c.entropy_k = 5;
  RunInfo info;
  const TimeSeries s = run(c, &info);
  const auto& E = s.column("E");
  for (std::size_t i = 1; i < E.size(); ++i) CHECK(E[i] <= E[i - 1]);
  CHECK(info.steps > 0);
  CHECK(s.names() == run_columns(c));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    MomentVector mv;
    for (double p : c.moment_ps) mv.set(p, s.column(moment_label(p))[i]);
    CHECK(mv.log_convex(1e-12));
  }
  std::ostringstream a, b;
  s.write_csv(a);
  run(c).write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,E,m_0.5,m_1,m_1.5,m_2,entropy,collisions\n", 0) == 0);
}

TEST_CASE("elastic run keeps E constant") {
  SimulationConfig c = small_config(1.0, 3000);
  const TimeSeries s = run(c);
  const auto& E = s.column("E");
  for (double e : E) CHECK(std::abs(e / E.front() - 1.0) < 1e-12);
}

TEST_CASE("energy stop") {
  SimulationConfig c = small_config(0.3, 3000);
  c.t_end = 1e6;
  c.stop_energy_ratio = 0.1;
  RunInfo info;
  const TimeSeries s = run(c, &info);
  CHECK(info.stopped_on_energy);
  CHECK(s.column("E").back() <= 0.1 * info.initial_energy);
  CHECK(s.column("E")[s.rows() - 2] > 0.1 * info.initial_energy);
}
