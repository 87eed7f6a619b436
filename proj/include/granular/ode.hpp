#pragma once

#include <functional>
#include <span>
#include <vector>

namespace granular::ode {

using State = std::vector<double>;
/// dy/dt = rhs(t, y), written into `dydt`.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct Tolerance {
  double rtol = 1e-9;
  double atol = 1e-12;
};

struct Sample {
  double t;
  State y;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) with PI-free standard step control. Steps are
/// clipped so that every requested output time is hit exactly; the
/// returned samples are in the order of `output_times` (which must be
/// non-decreasing and >= t0). Throws NumericError on step-size underflow
/// or a non-finite state.
std::vector<Sample> integrate(const Rhs& rhs, State y0, double t0, std::span<const double> output_times,
                              Tolerance tol = {}, Stats* stats = nullptr);

}  // namespace granular::ode
