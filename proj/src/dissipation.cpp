#include "granular/dissipation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "granular/error.hpp"
#include "granular/quadrature.hpp"
#include "granular/stats.hpp"

namespace granular {

double psi(const RestitutionModel& model, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("psi needs a finite squared speed >= 0");
  const double r32 = r * std::sqrt(r);
  if (const auto* c = std::get_if<ConstantRestitution>(&model.kind())) {
    return (1.0 - c->e0 * c->e0) * r32 / 8.0;
  }
  if (r == 0.0) return 0.0;
  const double speed = std::sqrt(r);
  auto integrand = [&](double z) {
    const double ev = model.e(speed * z);
    const double z2 = z * z;
    return (1.0 - ev * ev) * z2 * z;
  };
  // The inner integral is O(1); 1e-14 absolute keeps Psi within
  // 1e-12 max(1, r^{3/2}) and retains relative accuracy for small r.
  try {
    return 0.5 * r32 * quad::integrate(integrand, 0.0, 1.0, 1e-14).value;
  } catch (const NumericError& err) {
    throw NumericError(err.what(), 0.5 * r32 * err.estimate());
  }
}

double phi(const RestitutionModel& model, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("phi needs a finite speed > 0");
  if (const auto* c = std::get_if<ConstantRestitution>(&model.kind())) {
    return (1.0 - c->e0 * c->e0) / (c->e0 * c->e0);
  }
  const double upper = model.invert_theta(rho);
  auto integrand = [&](double r) {
    if (r == 0.0) return 0.0;
    const double ev = model.e(r);
    const double jac = model.jacobian(r).value;
    // r - theta(r) theta'(r) = r (1 - e(r) theta'(r))
    return r * (1.0 - ev * jac);
  };
  // |integrand| <= r up to the clamp, so the integral is O(upper^2).
  const double tol = 1e-13 * upper * upper;
  try {
    return 2.0 / (rho * rho) * quad::integrate(integrand, 0.0, upper, tol).value;
  } catch (const NumericError& err) {
    throw NumericError(err.what(), 2.0 / (rho * rho) * err.estimate());
  }
}

ShapeReport verify_psi_shape(const RestitutionModel& model, std::span<const double> grid) {
  if (grid.size() < 3) throw DomainError("verify_psi_shape needs at least three grid points");
  ShapeReport rep;
  rep.grid.assign(grid.begin(), grid.end());
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = psi(model, grid[i]);

  rep.monotone = true;
  rep.monotone_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double scale = std::max(std::abs(values[i]), std::abs(values[i + 1]));
    const double diff = values[i + 1] - values[i];
    const double rel = scale > 0 ? diff / scale : 0.0;
    if (rel < rep.monotone_margin) {
      rep.monotone_margin = rel;
      rep.monotone_witness = grid[i];
    }
    if (!(diff > 0)) rep.monotone = false;
  }

  rep.convex = true;
  rep.convex_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double left = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
    const double right = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    const double scale = std::max(std::abs(left), std::abs(right));
    const double rel = scale > 0 ? (right - left) / scale : 0.0;
    if (rel < rep.convex_margin) {
      rep.convex_margin = rel;
      rep.convex_witness = grid[i];
    }
    if (rel < -1e-10) rep.convex = false;
  }
  return rep;
}

PhiAsymptotics phi_asymptotics(const RestitutionModel& model, double alpha, double gamma, double m,
                               std::span<const double> grid) {
  if (grid.size() < 3) throw DomainError("phi_asymptotics needs at least three grid points");
  PhiAsymptotics out;
  if (gamma > 0.0) {
    out.small_checked = true;
    out.small_ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      const double rho = grid[i];
      const double ratio = phi(model, rho) / (2.0 * alpha * std::pow(rho, gamma));
      out.small_ratios.push_back(ratio);
      if (!(ratio >= 0.8 && ratio <= 1.2)) out.small_ok = false;
    }
  }

  std::vector<double> lx, ly;
  const double top = grid.back();
  for (double rho : grid) {
    if (rho < top / 10.0) continue;
    const double ratio = phi(model, rho) / std::pow(rho, 2.0 * (m - 1.0));
    if (!(ratio > 0)) {
      // Phi vanishes identically (elastic); trivially bounded.
      lx.clear();
      break;
    }
    lx.push_back(std::log(rho));
    ly.push_back(std::log(ratio));
  }
  if (lx.size() >= 2) {
    out.large_trend = fit_line(lx, ly).slope;
    out.large_ok = out.large_trend <= 0.05;
  } else {
    out.large_trend = 0.0;
    out.large_ok = true;
  }
  return out;
}

}  // namespace granular
