#include <doctest.h>

#include <cmath>

#include "granular/error.hpp"
#include "granular/restitution.hpp"
#include "granular/stats.hpp"

using namespace granular;

namespace {

// Plain bisection on y^5 + c y^3 = 1 over [0, 1].
double bisect_root(double c) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * mid * mid * mid * mid + c * mid * mid * mid < 1.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("constant model") {
  const auto m = RestitutionModel::constant(0.9);
  CHECK(m.e(17.3) == 0.9);
  CHECK(m.theta(2.0) == doctest::Approx(1.8));
  CHECK(m.invert_theta(1.8) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.invert_theta(0.0) == 0.0);
  CHECK(m.jacobian(3.0).value == doctest::Approx(0.9));
  CHECK_THROWS_AS(RestitutionModel::constant(0.0), DomainError);
  CHECK_THROWS_AS(RestitutionModel::constant(1.5), DomainError);
  CHECK_THROWS_AS(m.e(-1.0), DomainError);
}

TEST_CASE("power law model") {
  const auto m = RestitutionModel::power_law(1.0, 1.0);
  CHECK(m.theta(0.5) == doctest::Approx(0.25));
  CHECK(m.e(100.0) == doctest::Approx(0.05));  // clamped
  const auto small = RestitutionModel::power_law(0.3, 0.5);
  const double r = 1e-6;
  CHECK(small.jacobian(r).value == doctest::Approx(1.0 - 0.3 * 1.5 * std::sqrt(r)).epsilon(1e-12));
}

TEST_CASE("viscoelastic coefficient against a bisection oracle") {
  const auto m = RestitutionModel::viscoelastic(1.0);
  CHECK(m.e(0.0) == 1.0);
  const double y = bisect_root(1.0);
  CHECK(std::abs(m.e(1.0) - std::pow(y, 5)) < 1e-14);
  for (double a : {0.5, 1.0, 2.0}) {
    const auto v = RestitutionModel::viscoelastic(a);
    for (double r : logspace(1e-8, 1e8, 97)) {
      const double e = v.e(r);
      CHECK(std::abs(e + a * std::pow(r, 0.2) * std::pow(e, 0.6) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("viscoelastic large-speed law e r^{1/3} -> a^{-5/3}") {
  for (double a : {0.5, 1.0, 2.0}) {
    const auto v = RestitutionModel::viscoelastic(a);
    for (double r : {1e6, 1e7, 1e8}) {
      CHECK(std::abs(v.e(r) * std::cbrt(r) / std::pow(a, -5.0 / 3.0) - 1.0) < 0.05);
    }
  }
}

TEST_CASE("theta round trip on the default grid") {
  for (const auto& m : {RestitutionModel::constant(0.7), RestitutionModel::viscoelastic(1.0),
                        RestitutionModel::power_law(0.2, 1.0, 0.6)}) {
    for (double y : logspace(1e-8, 1e8, 257)) {
      const double r = m.invert_theta(y);
      CHECK(std::abs(m.theta(r) - y) <= 1e-12 * std::max(1.0, y));
    }
  }
  const auto v = RestitutionModel::viscoelastic(1.0);
  CHECK(v.invert_theta(v.theta(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a non-monotone impact map cannot be inverted") {
  // e = max(1 - 2r, 0.05): theta peaks at r = 1/4 and falls until the clamp.
  const auto m = RestitutionModel::power_law(2.0, 1.0, 0.05);
  CHECK_THROWS_AS(m.invert_theta(0.1), InvariantError);
}

TEST_CASE("jacobian against central differences") {
  for (const auto& m : {RestitutionModel::viscoelastic(1.0), RestitutionModel::viscoelastic(0.5),
                        RestitutionModel::power_law(0.2, 0.5, 0.05)}) {
    for (double r : logspace(1e-4, 1e4, 65)) {
      const double h = 1e-6 * std::max(1.0, r);
      const double fd = (m.theta(r + h) - m.theta(r - h)) / (2.0 * h);
      const Jacobian j = m.jacobian(r);
      if (j.one_sided) continue;
      // Skip the kink of the clamped power law.
      if (std::abs(m.e(r + h) - m.e(r - h)) > 0 && (m.e(r + h) == 0.05 || m.e(r - h) == 0.05)) continue;
      CHECK(std::abs(j.value - fd) <= 1e-5);
    }
  }
  const auto v = RestitutionModel::viscoelastic(1.0);
  const double fd = (v.theta(1.0 + 1e-6) - v.theta(1.0 - 1e-6)) / 2e-6;
  CHECK(std::abs(v.jacobian(1.0).value / fd - 1.0) < 1e-6);
}

TEST_CASE("ell_gamma on the default grid") {
  const auto grid = default_grid();
  CHECK(ell_zero(RestitutionModel::constant(0.8), grid) == doctest::Approx(0.2));
  for (double a : {0.5, 1.0, 2.0}) {
    const double l = ell_gamma(RestitutionModel::viscoelastic(a), 0.2, grid);
    CHECK(l >= 0.95 * a);
    CHECK(l <= 1.05 * a);
  }
  CHECK(ell_gamma(RestitutionModel::power_law(0.3, 0.5), 0.5, grid) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK_THROWS_AS(ell_gamma(RestitutionModel::constant(0.5), 0.0, grid), DomainError);
}

TEST_CASE("assumption report") {
  const auto grid = default_grid();
  const AssumptionReport c = check_assumptions(RestitutionModel::constant(0.5), grid);
  CHECK(c.hyp1_pass());
  CHECK(c.gamma_detected == 0.0);
  CHECK(c.m_detected == doctest::Approx(1.0).epsilon(1e-6));

  const AssumptionReport v = check_assumptions(RestitutionModel::viscoelastic(1.0), grid);
  CHECK(v.hyp1_pass());
  CHECK(v.gamma_detected == doctest::Approx(0.2).epsilon(0.05));
  CHECK(v.m_detected == doctest::Approx(1.5).epsilon(0.05));
  CHECK(v.growth_ok);

  const AssumptionReport p = check_assumptions(RestitutionModel::power_law(2.0, 1.0, std::nullopt), grid);
  CHECK_FALSE(p.positivity.pass);
  CHECK(p.positivity.witness > 0.5);
  CHECK_FALSE(p.hyp1_pass());
}

TEST_CASE("nominal exponents") {
  CHECK(nominal_gamma(RestitutionModel::constant(0.9)) == 0.0);
  CHECK(nominal_gamma(RestitutionModel::viscoelastic(1.0)) == 0.2);
  CHECK(nominal_gamma(RestitutionModel::power_law(0.1, 0.7)) == 0.7);
}
