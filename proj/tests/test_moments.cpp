#include <doctest.h>

#include <cmath>

#include "granular/error.hpp"
#include "granular/moments.hpp"
#include "granular/stats.hpp"

using namespace granular;

TEST_CASE("kappa closed form") {
  CHECK(kappa(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kappa(2.0) == doctest::Approx(19.0 / 24.0).epsilon(1e-15));
  for (double p : {1.0, 1.25, 1.5, 2.0, 3.0, 5.0}) {
    CHECK(std::abs(kappa(p) - kappa_quadrature(p)) <= 1e-10);
    if (p > 1.0) CHECK(kappa(p) < 1.0);
  }
  CHECK(kappa(1.5) == doctest::Approx(0.87058).epsilon(1e-5));
}

TEST_CASE("critical restitution") {
  const ThresholdReport r = constant_threshold();
  CHECK(r.critical_e > 0.805);
  CHECK(r.critical_e < 0.813);
  CHECK(satisfies_small_inelasticity(0.9));
  CHECK_FALSE(satisfies_small_inelasticity(0.5));
}

TEST_CASE("ell0 threshold against the quadratic root") {
  const double c = std::pow(2.0, 3.2) / 4.2;
  const double alpha = (1.0 - kappa(1.5)) / 2.0;
  const double b = 1.0 + 3.0 * c;
  const double k0 = (b + std::sqrt(b * b + 4.0 * alpha)) / (2.0 * alpha);
  CHECK(-alpha * k0 * k0 + b * k0 + 1.0 == doctest::Approx(0.0).scale(k0 * k0));
  const ThresholdReport r = ell0_threshold(0.2, 1.0, 1.0);
  CHECK(r.k0 == doctest::Approx(k0).epsilon(1e-12));
  CHECK(r.ell0 == doctest::Approx(8.0 * alpha / (9.0 * c * k0)).epsilon(1e-12));
  const ThresholdReport doubled = ell0_threshold(0.2, 1.0, 2.0 * k0);
  CHECK(doubled.ell0 == doctest::Approx(0.5 * r.ell0).epsilon(1e-12));
  CHECK(ell0_threshold(0.2, 1e6, 1.0).ell0 < r.ell0);
  CHECK_THROWS_AS(ell0_threshold(-1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("moment vector interpolation and Jensen") {
  MomentVector mv;
  for (double p : {0.5, 1.0, 1.5, 2.0}) mv.set(p, maxwellian_moment(1.0 / 3.0, p));
  CHECK(mv.unit_mass());
  CHECK(mv.satisfies_jensen());
  CHECK(mv.log_convex());
  CHECK(mv.at(1.0) == doctest::Approx(1.0));
  const double mid = mv.at(1.25);
  CHECK(mid <= std::sqrt(mv.at(1.0) * mv.at(1.5)) * (1 + 1e-12));
  CHECK_THROWS_AS(mv.at(3.0), DomainError);
}

TEST_CASE("povzner bound with hand-expanded S_{3/2}") {
  MomentVector mv;
  mv.set(0.5, 1.0);
  mv.set(1.0, 1.0);
  mv.set(1.5, 1.0);
  mv.set(2.0, 1.0);
  // k = 1 only: binom(3/2, 1) (m_{3/2} m_{1/2} + m_1 m_1) = 1.5 * 2
  CHECK(povzner_sum(mv, 1.5) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(povzner_rhs(mv, 1.5) == doctest::Approx(-(1.0 - kappa(1.5)) + kappa(1.5) * 3.0).epsilon(1e-14));

  MomentVector g;
  for (double p : {0.5, 1.0, 1.5, 2.0, 2.5}) g.set(p, maxwellian_moment(1.0, p));
  // kappa_2 = 19/24, S_2 = 2 (m_{3/2} m_1 + m_1 m_{3/2}).
  const double s2 = 4.0 * g.at(1.5) * g.at(1.0);
  CHECK(povzner_rhs(g, 2.0) == doctest::Approx(-(5.0 / 24.0) * g.at(2.5) + (19.0 / 24.0) * s2).epsilon(1e-13));
}

TEST_CASE("mean-field energy against the closed form") {
  for (double e : {0.3, 0.5, 0.9}) {
    const auto model = RestitutionModel::constant(e);
    const TimeSeries s = integrate_meanfield_energy(model, 1.0, 100.0);
    const auto& t = s.time();
    const auto& E = s.column("E");
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(E[i] / meanfield_constant_solution(e, 1.0, t[i]) - 1.0) <= 1e-6);
    }
  }
  const std::vector<double> at{16.0 / 0.75};
  const TimeSeries q = integrate_meanfield_energy(RestitutionModel::constant(0.5), 1.0, at);
  CHECK(q.column("E").front() == doctest::Approx(0.25).epsilon(1e-8));
  const TimeSeries el = integrate_meanfield_energy(RestitutionModel::constant(1.0), 1.0, 50.0);
  CHECK(el.column("E").back() == 1.0);
}

TEST_CASE("mean-field viscoelastic decay exponent") {
  const TimeSeries s = integrate_meanfield_energy(RestitutionModel::viscoelastic(1.0), 1.0, 1e12);
  const auto& t = s.time();
  const auto& E = s.column("E");
  const std::size_t n = t.size();
  const double slope = (std::log(E[n - 1]) - std::log(E[n - 65])) / (std::log1p(t[n - 1]) - std::log1p(t[n - 65]));
  CHECK(slope == doctest::Approx(-5.0 / 3.0).epsilon(0.01));
}

TEST_CASE("mean-field trajectory stays above the lower Haff envelope") {
  const auto model = RestitutionModel::viscoelastic(1.0);
  const TimeSeries s = integrate_meanfield_energy(model, 1.0, 1e4);
  const auto& t = s.time();
  const auto& E = s.column("E");
  const double ell = ell_gamma(model, 0.2, default_grid());
  // K from the same run: the moment ratio of a Maxwellian, m_{3/2}/E^{3/2}.
  const double k = maxwellian_moment(1.0 / 3.0, 1.5);
  const double c = controlled_cooling_constant(0.2, k, ell);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(E[i] >= haff_lower_envelope(1.0, 0.2, c, t[i]) * (1 - 1e-9));
}

TEST_CASE("moment hierarchy") {
  MomentVector mv;
  for (double p : {0.5, 1.0, 1.5, 2.0}) mv.set(p, maxwellian_moment(1.0 / 3.0, p));
  const auto times = log_output_times(1e-2, 100.0, 16);
  const HierarchyRun run = integrate_moment_hierarchy(RestitutionModel::constant(0.9), mv, 2.0, times);
  CHECK(run.label == "upper bound only");
  REQUIRE(run.trajectory.size() == times.size());
  double worst = 0.0;
  for (const auto& m : run.trajectory) {
    for (const auto& [p, v] : m.entries()) CHECK(v > 0.0);
    worst = std::max(worst, m.at(1.5) / std::pow(m.at(1.0), 1.5));
  }
  CHECK(worst < 50.0);

  const HierarchyRun el = integrate_moment_hierarchy(RestitutionModel::constant(1.0), mv, 2.0, times);
  CHECK(el.label == "upper bound only");

  MomentVector bad;
  bad.set(0.0, 2.0);
  bad.set(1.0, 1.0);
  bad.set(1.5, 1.0);
  CHECK_THROWS_AS(integrate_moment_hierarchy(RestitutionModel::constant(0.9), bad, 1.5, times), DomainError);
}

TEST_CASE("output grid") {
  const auto g = log_output_times(1e-2, 100.0, 64);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 100.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}
