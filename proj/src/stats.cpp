#include "granular/stats.hpp"

#include <cmath>

#include "granular/error.hpp"

namespace granular {

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  if (!(lo > 0) || !(hi >= lo) || count == 0) throw DomainError("logspace needs 0 < lo <= hi and count > 0");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * double(i) / double(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_grid() { return logspace(1e-8, 1e8, 2048); }

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw DomainError("fit_line needs two or more paired samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw DomainError("fit_line: abscissae are all equal");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / double(n));
  f.slope_stderr = n > 2 ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
  return f;
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 4) throw DomainError("fit_quadratic needs four or more paired samples");
  // Centre and scale the abscissa for conditioning, then map back.
  double mx = 0;
  for (double v : x) mx += v;
  mx /= double(n);
  double sx = 0;
  for (double v : x) sx = std::max(sx, std::abs(v - mx));
  if (sx == 0) throw DomainError("fit_quadratic: abscissae are all equal");

  // Normal equations on z = (x - mx) / sx.
  double s[5] = {0, 0, 0, 0, 0}, r[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x[i] - mx) / sx;
    double p = 1;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) r[k] += p * y[i];
      p *= z;
    }
  }
  double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  // Inverse by cofactors (3x3, symmetric positive definite).
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (!(std::abs(det) > 0)) throw DomainError("fit_quadratic: singular design");
  double inv[3][3];
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = inv[0][1];
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = inv[0][2];
  inv[2][1] = inv[1][2];
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  double b[3];
  for (int i = 0; i < 3; ++i) b[i] = inv[i][0] * r[0] + inv[i][1] * r[1] + inv[i][2] * r[2];

  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x[i] - mx) / sx;
    const double res = y[i] - (b[0] + b[1] * z + b[2] * z * z);
    ss += res * res;
  }
  QuadraticFit f;
  f.n = n;
  f.residual_variance = ss / double(n - 3);
  // y = b0 + b1 (x-mx)/sx + b2 (x-mx)^2/sx^2
  f.c2 = b[2] / (sx * sx);
  f.c1 = b[1] / sx - 2 * mx * f.c2;
  f.c0 = b[0] - b[1] * mx / sx + f.c2 * mx * mx;
  f.c2_stderr = std::sqrt(std::max(0.0, f.residual_variance * inv[2][2])) / (sx * sx);
  return f;
}

}  // namespace granular
