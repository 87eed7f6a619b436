#include <doctest.h>

#include <cmath>
#include <sstream>

#include "granular/error.hpp"
#include "granular/haff.hpp"

using namespace granular;

namespace {

TimeSeries synthetic(std::vector<std::pair<std::string, double (*)(double)>> cols, double t_end = 1e4) {
  std::vector<std::string> names{"t"};
  for (const auto& c : cols) names.push_back(c.first);
  TimeSeries s(names);
  std::vector<double> row;
  for (int i = 0; i <= 400; ++i) {
    const double t = i == 0 ? 0.0 : std::pow(10.0, -2.0 + (std::log10(t_end) + 2.0) * (i - 1) / 399.0);
    row = {t};
    for (const auto& c : cols) row.push_back(c.second(t));
    s.append(row);
  }
  return s;
}

double haff2(double t) { return std::pow(1.0 + t, -2.0); }
double haff2x3(double t) { return 3.0 * std::pow(1.0 + t, -2.0); }

}  // namespace

TEST_CASE("fit_decay on exact power laws") {
  const TimeSeries s = synthetic({{"E", haff2}});
  const DecayFit f = fit_decay(s);
  CHECK(std::abs(f.exponent + 2.0) < 1e-10);
  CHECK(f.prefactor == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.residual >= 0.0);
  CHECK(f.n_points >= 8);
  CHECK(f.t_hi == 1e4);

  const TimeSeries tiny = synthetic({{"E", haff2}});
  CHECK_THROWS_AS(fit_decay(tiny, "E", TimeWindow{10.0, 10.5}), DomainError);
}

TEST_CASE("sandwich") {
  const SandwichCheck ok = check_sandwich(synthetic({{"E", haff2x3}}), 0.0);
  CHECK(ok.c_hat == doctest::Approx(3.0));
  CHECK(ok.C_hat == doctest::Approx(3.0));
  CHECK(ok.pass);
  const SandwichCheck wrong = check_sandwich(synthetic({{"E", haff2}}), 1.0);
  CHECK_FALSE(wrong.pass);
  CHECK(wrong.c_hat <= wrong.C_hat);
}

TEST_CASE("moment scaling") {
  const TimeSeries good = synthetic({{"E", haff2}, {"m_1.5", +[](double t) { return 1.2275 * std::pow(std::pow(1.0 + t, -2.0), 1.5); }}});
  const MomentScalingCheck g = check_moment_scaling(good, 1.5);
  CHECK(g.pass);
  CHECK(g.K_hat == doctest::Approx(1.2275));
  const TimeSeries bad = synthetic({{"E", haff2}, {"m_1.5", +[](double t) { return std::pow(std::pow(1.0 + t, -2.0), 1.4); }}});
  CHECK_FALSE(check_moment_scaling(bad, 1.5).pass);
}

TEST_CASE("entropy growth") {
  const TimeSeries lg = synthetic({{"entropy", +[](double t) { return 2.0 * std::log1p(t); }}});
  const EntropyGrowthCheck a = check_entropy_growth(lg);
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(a.pass);
  const TimeSeries sq = synthetic({{"entropy", +[](double t) { return std::sqrt(t); }}});
  CHECK_FALSE(check_entropy_growth(sq).pass);
}

TEST_CASE("integrated Haff") {
  const IntegratedHaffCheck a = check_integrated_haff(synthetic({{"E", haff2}}));
  CHECK(a.liminf_ratio == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(a.pass);
  const IntegratedHaffCheck b = check_integrated_haff(synthetic({{"E", +[](double t) { return std::exp(-t); }}}));
  CHECK_FALSE(b.pass);
}

TEST_CASE("small experiment matrix") {
  MatrixConfig m;
  m.constant_e = {0.5};
  m.viscoelastic_a = {1.0};
  m.particles = 3000;
  m.energy_drop = 1e-2;
  m.entropy_k = 5;
  const auto rows = experiment_matrix(m);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(r.fitted_exp <= 0.0);
    CHECK(r.c_hat <= r.C_hat);
    CHECK(r.below_meanfield);
  }
  CHECK(rows[0].threshold_verdict.rfind("below critical 0.809", 0) == 0);
  CHECK(rows[1].theory_exp == doctest::Approx(-5.0 / 3.0));
  std::ostringstream os;
  write_summary_csv(rows, os);
  CHECK(os.str().rfind("run_id,model,gamma,theory_exp,fitted_exp,residual,c_hat,C_hat,threshold_verdict,entropy_slope\n", 0) == 0);
}
