#include "granular/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "granular/error.hpp"

namespace granular::ode {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::vector<Sample> integrate(const Rhs& rhs, State y, double t0, std::span<const double> output_times,
                              Tolerance tol, Stats* stats) {
  const std::size_t n = y.size();
  Stats local;
  Stats& st = stats ? *stats : local;
  std::vector<Sample> out;
  out.reserve(output_times.size());

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);
  auto eval = [&](double t, std::span<const double> yy, std::span<double> k) {
    rhs(t, yy, k);
    ++st.rhs_evaluations;
  };

  double t = t0;
  eval(t, y, k1);
  double h = 0.0;
  if (!output_times.empty()) {
    // Initial step from the derivative scale.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = tol.atol + tol.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    const double span = std::max(output_times.back() - t0, 0.0);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (span > 0) h = std::min(h, span);
  }

  for (double target : output_times) {
    while (t < target) {
      const double remaining = target - t;
      const bool clipped = h >= remaining;
      const double h_natural = h;
      if (clipped) h = remaining;
      if (h <= std::abs(t) * 4 * std::numeric_limits<double>::epsilon() || h == 0.0) {
        throw NumericError("ODE step size underflow", y.empty() ? 0.0 : y[0]);
      }

      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      eval(t + c2 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      eval(t + c3 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      eval(t + c4 * h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      eval(t + c5 * h, tmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      eval(t + h, tmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      eval(t + h, y5, k7);

      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        finite = finite && std::isfinite(y5[i]);
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!finite) err = std::numeric_limits<double>::infinity();

      if (err <= 1.0) {
        t = clipped ? target : t + h;
        y.swap(y5);
        k1.swap(k7);
        ++st.accepted;
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A clipped step says nothing about the natural step size.
        h = clipped ? std::max(h_natural, h) : h * grow;
      } else {
        ++st.rejected;
        h *= std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      }
    }
    for (double v : y) {
      if (!std::isfinite(v)) throw NumericError("ODE state became non-finite", t);
    }
    out.push_back({target, y});
  }
  return out;
}

}  // namespace granular::ode
