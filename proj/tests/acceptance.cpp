// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "granular/cli.hpp"
#include "granular/dsmc.hpp"
#include "granular/entropy.hpp"
#include "granular/haff.hpp"
#include "granular/moments.hpp"
#include "granular/restitution.hpp"
#include "granular/stats.hpp"

using namespace granular;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// The common DSMC protocol: N = 1e5, Maxwellian with E(0) = 1, stop after
// the energy has dropped three decades.
SimulationConfig haff_protocol(const RestitutionModel& model, int entropy_k, std::uint64_t seed) {
  SimulationConfig c;
  c.particles = 100000;
  c.model = model;
  c.init = MaxwellianInit{1.0 / 3.0};
  c.t_end = 1e7;
  c.stop_energy_ratio = 1e-3;
  c.entropy_k = entropy_k;
  c.seed = seed;
  return c;
}

double pair_energy(const Vec3& a, const Vec3& b) { return norm2(a) + norm2(b); }

}  // namespace

int main() {
  report(1, "Povzner constant", [] {
    const double k = kappa(1.5);
    const double dq = std::abs(k - kappa_quadrature(1.5));
    const double ec = constant_threshold().critical_e;
    return Verdict{dq <= 1e-10 && ec >= 0.805 && ec <= 0.813,
                   fmt("kappa_3/2=%.12f |closed-quad|=%.2e critical_e=%.6f", k, dq, ec)};
  });

  // One viscoelastic run feeds criteria 3 and 7.
  TimeSeries visco;
  std::string visco_error;
  double visco_secs = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    try {
      visco = run(haff_protocol(RestitutionModel::viscoelastic(1.0), 5, 3));
    } catch (const std::exception& e) {
      visco_error = e.what();
    }
    visco_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  report(2, "Haff law, constant e=0.9", [] {
    const TimeSeries s = run(haff_protocol(RestitutionModel::constant(0.9), 0, 2));
    const DecayFit f = fit_decay(s);
    const SandwichCheck sw = check_sandwich(s, 0.0);
    const bool ok = std::abs(f.exponent + 2.0) <= 0.1 && sw.ratio <= 10.0;
    return Verdict{ok, fmt("exponent=%.4f on t in [%.3g, %.3g] (target -2 +- 0.1), sandwich ratio=%.3f (<= 10)",
                           f.exponent, f.t_lo, f.t_hi, sw.ratio)};
  });

  report(3, "Haff law, viscoelastic a=1", [&] {
    if (!visco_error.empty()) return Verdict{false, "run failed: " + visco_error};
    const DecayFit f = fit_decay(visco);
    const bool ok = std::abs(f.exponent + 5.0 / 3.0) <= 0.12;
    return Verdict{ok, fmt("exponent=%.4f on t in [%.3g, %.3g] (target -5/3 +- 0.12), run %.0fs", f.exponent, f.t_lo,
                           f.t_hi, visco_secs)};
  });

  report(4, "Mean-field ODE exactness", [] {
    double worst = 0.0;
    for (double e : {0.3, 0.5, 0.9}) {
      const TimeSeries s = integrate_meanfield_energy(RestitutionModel::constant(e), 1.0, 100.0);
      const auto& t = s.time();
      const auto& E = s.column("E");
      for (std::size_t i = 0; i < t.size(); ++i) {
        worst = std::max(worst, std::abs(E[i] / meanfield_constant_solution(e, 1.0, t[i]) - 1.0));
      }
    }
    return Verdict{worst <= 1e-6, fmt("max relative deviation %.2e (<= 1e-6)", worst)};
  });

  report(5, "Collision micro-identities", [] {
    const std::vector<RestitutionModel> models{RestitutionModel::constant(0.3), RestitutionModel::constant(0.9),
                                               RestitutionModel::constant(1.0), RestitutionModel::power_law(0.2, 1.0, 0.6),
                                               RestitutionModel::viscoelastic(0.5), RestitutionModel::viscoelastic(2.0)};
    Rng rng(12);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> scale_exp(-3.0, 3.0);
    double mom = 0, normal = 0, energy = 0, tangential = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const RestitutionModel& m = models[std::size_t(i) % models.size()];
      const double s = std::pow(10.0, scale_exp(rng));
      const Vec3 v{s * g(rng), s * g(rng), s * g(rng)};
      const Vec3 w{s * g(rng), s * g(rng), s * g(rng)};
      const Vec3 u = v - w;
      const Vec3 nhat = sample_direction(u, rng);
      const CollisionOutcome c = collide_pair(v, w, nhat, m);
      const double e = c.restitution;
      const double un = dot(u, nhat);
      const Vec3 up = c.v - c.v_star;
      const double sc = pair_energy(v, w);
      mom = std::max(mom, norm((c.v + c.v_star) - (v + w)) / std::sqrt(sc));
      normal = std::max(normal, std::abs(dot(up, nhat) + e * un) / std::sqrt(sc));
      const double de = pair_energy(c.v, c.v_star) - sc;
      energy = std::max(energy, std::abs(de + 0.5 * (1.0 - e * e) * un * un) / sc);
      tangential = std::max(tangential, norm((up - dot(up, nhat) * nhat) - (u - un * nhat)) / std::sqrt(sc));
    }
    const bool ok = mom <= 1e-12 && normal <= 1e-12 && energy <= 1e-12 && tangential <= 1e-12;
    return Verdict{ok, fmt("1e6 collisions, max relative errors: momentum %.1e, normal %.1e, energy %.1e, "
                           "tangential %.1e (each <= 1e-12)",
                           mom, normal, energy, tangential)};
  });

  report(6, "Viscoelastic model fidelity", [] {
    const double a = 1.0;
    const auto m = RestitutionModel::viscoelastic(a);
    double residual = 0.0;
    for (double r : logspace(1e-3, 1e3, 121)) {
      const double e = m.e(r);
      residual = std::max(residual, std::abs(e + a * std::pow(r, 0.2) * std::pow(e, 0.6) - 1.0));
    }
    const double ell = ell_gamma(m, 0.2, default_grid());
    const double target = std::pow(a, -5.0 / 3.0);
    double large = 0.0;
    for (double r : {1e6, 1e7, 1e8}) large = std::max(large, std::abs(m.e(r) * std::cbrt(r) / target - 1.0));
    const bool ok = residual <= 1e-12 && std::abs(ell / a - 1.0) <= 0.05 && large <= 0.05;
    return Verdict{ok, fmt("residual %.1e (<= 1e-12), ell_1/5=%.5f vs a=%.1f, max |e r^(1/3) / a^(-5/3) - 1| at "
                           "r >= 1e6: %.4f (<= 0.05)",
                           residual, ell, a, large)};
  });

  report(7, "Entropy growth, viscoelastic a=1", [&] {
    if (!visco_error.empty()) return Verdict{false, "run failed: " + visco_error};
    const EntropyGrowthCheck c = check_entropy_growth(visco);
    return Verdict{c.pass, fmt("slope=%.4f curvature=%.3e +- %.1e, one-sided p=%.3g over %zu rows (need p >= 0.05)",
                               c.slope, c.curvature, c.curvature_stderr, c.p_value, c.n_points)};
  });

  report(8, "Appendix inequalities", [] {
    const auto family = standard_family(100, 20, 0);
    const InequalityReport rep = check_inequalities(family);
    const double c = moment_lower_bound_constant(3, 2.0, 0.5);
    const double explicit_c = 0.5 * std::pow(3.0 / (8.0 * std::numbers::pi), 2.0 / 3.0);
    std::size_t m2_fail = 0;
    for (const auto& d : family) {
      if (d.m2 < explicit_c * std::exp(-4.0 * d.h_abs / 3.0)) ++m2_fail;
    }
    const bool ok = rep.violations == 0 && m2_fail == 0 && std::abs(c / explicit_c - 1.0) < 1e-14;
    return Verdict{ok, fmt("%zu distributions, %zu violations, M_2 bound failures %zu, worst slack %.3g (%s)",
                           family.size(), rep.violations, m2_fail, rep.worst_slack, rep.worst_name.c_str())};
  });

  report(9, "Moment scaling, e=0.95", [] {
    SimulationConfig c = haff_protocol(RestitutionModel::constant(0.95), 0, 4);
    const TimeSeries s = run(c);
    const MomentScalingCheck m = check_moment_scaling(s, 1.5);
    return Verdict{m.pass, fmt("running max of m_3/2/E^3/2 = %.4f, last-decade increase %.2f%% (<= 20%%), t_end=%.3g",
                               m.K_hat, 100.0 * m.trend, s.time().back())};
  });

  report(10, "Integrated Haff law, e=0.5", [] {
    SimulationConfig c = haff_protocol(RestitutionModel::constant(0.5), 0, 5);
    c.stop_energy_ratio.reset();
    c.t_end = 1e4;
    const TimeSeries s = run(c);
    const IntegratedHaffCheck h = check_integrated_haff(s);
    return Verdict{h.pass, fmt("inf ratio %.4f, max/min %.4f (<= 1.2) over the last decade of [0, %.3g]",
                               h.liminf_ratio, h.max_ratio / h.liminf_ratio, s.time().back())};
  });

  report(11, "Lambert W", [] {
    double worst = 0.0;
    const double branch = -1.0 / std::numbers::e;
    for (double off : logspace(1e-6, 1e6 - branch, 2001)) {
      const double x = branch + off;
      const double w = lambert_w(x);
      worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x)));
    }
    double omega = 0.5;
    for (int i = 0; i < 100; ++i) omega -= (omega * std::exp(omega) - 1.0) / (std::exp(omega) * (1.0 + omega));
    const double dw = std::abs(lambert_w(1.0) - omega);
    return Verdict{worst <= 1e-12 && dw <= 1e-10,
                   fmt("round-trip max error %.2e (<= 1e-12), |W(1) - Newton| = %.1e (<= 1e-10)", worst, dw)};
  });

  report(12, "Reproducibility", [] {
    const fs::path dir = fs::temp_directory_path() / "granular_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    const fs::path cfg = dir / "repro.toml";
    std::ofstream(cfg) << "particles = 20000\nt_end = 50.0\nseed = 77\nentropy_k = 5\n"
                          "[restitution]\nkind = \"viscoelastic\"\na = 1.0\n";
    auto read = [](const fs::path& p) {
      std::ifstream is(p, std::ios::binary);
      std::ostringstream ss;
      ss << is.rdbuf();
      return ss.str();
    };
    std::ostringstream out, err;
    const int ca = run_cli({"run", cfg.string(), "--out-dir", (dir / "a").string()}, out, err);
    const int cb = run_cli({"run", cfg.string(), "--out-dir", (dir / "b").string()}, out, err);
    const std::string a = read(dir / "a" / "repro.csv");
    const std::string b = read(dir / "b" / "repro.csv");
    const bool ok = ca == 0 && cb == 0 && !a.empty() && a == b;
    fs::remove_all(dir);
    return Verdict{ok, fmt("exit codes %d/%d, CSV sizes %zu/%zu bytes, identical=%s", ca, cb, a.size(), b.size(),
                           a == b ? "yes" : "no")};
  });

  // Not a criterion: the constant-e run continued far past the three-decade
  // protocol shows where the fitted exponent settles.
  {
    const auto start = std::chrono::steady_clock::now();
    try {
      SimulationConfig c = haff_protocol(RestitutionModel::constant(0.9), 0, 2);
      c.stop_energy_ratio.reset();
      c.t_end = 1e8;
      const TimeSeries s = run(c);
      const DecayFit f = fit_decay(s, "E", TimeWindow{1e7, 1e8});
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("INFO [ 2] constant e=0.9 extended to t=1e8: exponent=%.4f over the last decade (%.1fs)\n",
                  f.exponent, secs);
    } catch (const std::exception& e) {
      std::printf("INFO [ 2] extended run failed: %s\n", e.what());
    }
  }

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
