#pragma once

#include <span>
#include <vector>

#include "granular/restitution.hpp"

namespace granular {

/// Energy dissipation potential Psi_e(r) of a pair with squared relative
/// speed r >= 0:  (r^{3/2} / 2) * int_0^1 (1 - e(sqrt(r) z)^2) z^3 dz.
double psi(const RestitutionModel& model, double r);

/// Entropy-production kernel Phi_e(rho), rho > 0:
/// (2 / rho^2) * int_0^{theta^{-1}(rho)} (r - theta(r) theta'(r)) dr.
double phi(const RestitutionModel& model, double rho);

struct ShapeReport {
  bool monotone = false;
  bool convex = false;
  double monotone_witness = 0.0;  // left point of the worst pair
  double monotone_margin = 0.0;   // smallest relative increment
  double convex_witness = 0.0;    // middle point of the worst triple
  double convex_margin = 0.0;     // smallest relative slope increase
  std::vector<double> grid;
};

/// First and second divided differences of Psi_e over the grid (squared
/// speeds). Convexity tolerates a relative slope decrease of 1e-10.
ShapeReport verify_psi_shape(const RestitutionModel& model, std::span<const double> grid);

struct PhiAsymptotics {
  bool small_checked = false;  // skipped when gamma == 0
  bool small_ok = false;
  bool large_ok = false;
  std::vector<double> small_ratios;  // Phi / (2 alpha rho^gamma) at the three smallest grid points
  double large_trend = 0.0;          // log-log slope of Phi / rho^{2(m-1)} on the largest decade
};

/// Compares Phi_e against its small-speed law 2 alpha rho^gamma (20% band)
/// and its large-speed bound C rho^{2(m-1)} (non-increasing trend, slope <= 0.05).
PhiAsymptotics phi_asymptotics(const RestitutionModel& model, double alpha, double gamma, double m,
                               std::span<const double> grid);

}  // namespace granular
