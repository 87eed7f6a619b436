#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace granular {

/// `count` points log-spaced from `lo` to `hi` inclusive.
std::vector<double> logspace(double lo, double hi, std::size_t count);

/// Default verification grid: 2048 log-spaced points on [1e-8, 1e8].
std::vector<double> default_grid();

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct QuadraticFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double c2_stderr = 0.0;
  double residual_variance = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = c0 + c1 x + c2 x^2 with the standard error
/// of the curvature coefficient.
QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

}  // namespace granular
