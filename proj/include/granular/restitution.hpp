#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace granular {

/// e(r) = e0 for every impact speed.
struct ConstantRestitution {
  double e0 = 1.0;
};

/// e(r) = max(1 - alpha r^gamma, e_floor). An empty floor leaves the raw
/// formula, which goes non-positive beyond r = alpha^{-1/gamma}.
struct PowerLawRestitution {
  double alpha = 0.0;
  double gamma = 0.0;
  std::optional<double> e_floor = 0.05;
};

/// Viscoelastic spheres: e(r) is the root in (0, 1] of e + a r^{1/5} e^{3/5} = 1.
struct ViscoelasticRestitution {
  double a = 0.0;
};

/// Derivative of the impact map theta(r) = r e(r). `one_sided` is set when
/// r sits exactly on the power-law clamp and the left derivative is returned.
struct Jacobian {
  double value = 0.0;
  bool one_sided = false;
};

/// Impact-speed dependent coefficient of normal restitution. Immutable once
/// built; all evaluations are pure.
class RestitutionModel {
public:
  using Kind = std::variant<ConstantRestitution, PowerLawRestitution, ViscoelasticRestitution>;

  static RestitutionModel constant(double e0);
  static RestitutionModel power_law(double alpha, double gamma, std::optional<double> e_floor = 0.05);
  static RestitutionModel viscoelastic(double a);

  const Kind& kind() const noexcept { return kind_; }
  bool is_constant() const noexcept { return std::holds_alternative<ConstantRestitution>(kind_); }
  std::string describe() const;

  /// e(r). Throws DomainError for negative or non-finite r.
  double e(double r) const;
  /// theta(r) = r e(r).
  double theta(double r) const { return r * e(r); }
  /// r with theta(r) = y, |theta(r) - y| <= 1e-12 max(1, y).
  double invert_theta(double y) const;
  /// theta'(r) = e(r) + r e'(r), r > 0.
  Jacobian jacobian(double r) const;

private:
  explicit RestitutionModel(Kind k) : kind_(k) {}
  Kind kind_;
};

/// Root y in [0, 1] of y^5 + c y^3 = 1 (c >= 0); the viscoelastic
/// coefficient is y^5 with c = a r^{1/5}.
double viscoelastic_root(double c);

/// Small-speed exponent of 1 - e(r) from the model's parameters: 0 for a
/// constant coefficient, gamma for a power law, 1/5 for viscoelastic spheres.
double nominal_gamma(const RestitutionModel& model);

/// sup over the grid of (1 - e(r)) / r^gamma, gamma > 0.
double ell_gamma(const RestitutionModel& model, double gamma, std::span<const double> grid);
/// sup over the grid of 1 - e(r), the gamma = 0 case (1 - e0 for a constant model).
double ell_zero(const RestitutionModel& model, std::span<const double> grid);

struct AssumptionItem {
  bool pass = false;
  double witness = 0.0;  // grid point of worst margin
  double margin = 0.0;
};

struct AssumptionReport {
  // Positivity and boundedness of e, monotone theta, limsup e < 1, Psi monotone+convex.
  AssumptionItem positivity;
  AssumptionItem theta_increasing;
  AssumptionItem limsup_below_one;
  AssumptionItem psi_shape;
  // Growth data: small-speed exponent, large-y inverse-map exponent and its constant.
  double gamma_detected = 0.0;
  double m_detected = 0.0;
  double c_large = 0.0;
  bool growth_ok = false;  // m >= 1 + gamma / 2
  double ell = 0.0;        // ell_gamma at gamma_detected (ell_zero when gamma is 0)

  bool hyp1_pass() const {
    return positivity.pass && theta_increasing.pass && limsup_below_one.pass && psi_shape.pass;
  }
};

/// Numerical check of the standing assumptions on a log-spaced grid.
AssumptionReport check_assumptions(const RestitutionModel& model, std::span<const double> grid);

}  // namespace granular
