#include "granular/restitution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "granular/dissipation.hpp"
#include "granular/error.hpp"
#include "granular/stats.hpp"

namespace granular {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_speed(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("impact speed must be finite and >= 0");
}

}  // namespace

RestitutionModel RestitutionModel::constant(double e0) {
  if (!(e0 > 0.0 && e0 <= 1.0)) throw DomainError("constant restitution needs e0 in (0, 1]");
  return RestitutionModel(ConstantRestitution{e0});
}

RestitutionModel RestitutionModel::power_law(double alpha, double gamma, std::optional<double> e_floor) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("power-law restitution needs alpha > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("power-law restitution needs gamma >= 0");
  if (e_floor && !(*e_floor > 0.0 && *e_floor < 1.0)) throw DomainError("e_floor must lie in (0, 1)");
  return RestitutionModel(PowerLawRestitution{alpha, gamma, e_floor});
}

RestitutionModel RestitutionModel::viscoelastic(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("viscoelastic restitution needs a > 0");
  return RestitutionModel(ViscoelasticRestitution{a});
}

std::string RestitutionModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ConstantRestitution& c) { os << "constant(e0=" << c.e0 << ")"; },
                 [&](const PowerLawRestitution& p) {
                   os << "power_law(alpha=" << p.alpha << ",gamma=" << p.gamma;
                   if (p.e_floor) os << ",e_floor=" << *p.e_floor;
                   os << ")";
                 },
                 [&](const ViscoelasticRestitution& v) { os << "viscoelastic(a=" << v.a << ")"; },
             },
             kind_);
  return os.str();
}

double viscoelastic_root(double c) {
  if (c <= 0.0) return 1.0;
  // f(y) = y^5 + c y^3 - 1 is increasing and convex on [0, 1], so Newton
  // started right of the root descends monotonically; the bracket only
  // guards against round-off.
  double lo = 0.0, hi = 1.0;
  double y = std::min(1.0, std::cbrt(1.0 / c));
  for (int iter = 0; iter < 200; ++iter) {
    const double y2 = y * y, y3 = y2 * y;
    const double f = y3 * (y2 + c) - 1.0;
    if (f > 0) hi = std::min(hi, y);
    else if (f < 0) lo = std::max(lo, y);
    else return y;
    const double df = y2 * (5.0 * y2 + 3.0 * c);
    double next = y - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-17 * std::max(y, 1e-300) || next == y) return next;
    y = next;
  }
  return y;
}

double RestitutionModel::e(double r) const {
  require_speed(r);
  return std::visit(overloaded{
                        [](const ConstantRestitution& c) { return c.e0; },
                        [r](const PowerLawRestitution& p) {
                          const double raw = 1.0 - p.alpha * std::pow(r, p.gamma);
                          return p.e_floor ? std::max(raw, *p.e_floor) : raw;
                        },
                        [r](const ViscoelasticRestitution& v) {
                          if (r == 0.0) return 1.0;
                          const double y = viscoelastic_root(v.a * std::pow(r, 0.2));
                          const double y2 = y * y;
                          return y2 * y2 * y;
                        },
                    },
                    kind_);
}

Jacobian RestitutionModel::jacobian(double r) const {
  require_speed(r);
  return std::visit(
      overloaded{
          [](const ConstantRestitution& c) { return Jacobian{c.e0, false}; },
          [r](const PowerLawRestitution& p) {
            const double rg = std::pow(r, p.gamma);
            const double raw = 1.0 - p.alpha * rg;
            const double smooth = 1.0 - p.alpha * (1.0 + p.gamma) * rg;
            if (!p.e_floor || raw > *p.e_floor) return Jacobian{smooth, false};
            if (raw == *p.e_floor) return Jacobian{smooth, true};
            return Jacobian{*p.e_floor, false};
          },
          [this, r](const ViscoelasticRestitution& v) {
            const double ev = e(r);
            if (r == 0.0) return Jacobian{1.0, false};
            const double r15 = std::pow(r, 0.2);
            const double denom = 1.0 + 0.6 * v.a * r15 * std::pow(ev, -0.4);
            if (denom < 1e-14) {
              const double h = 1e-6 * std::max(1.0, r);
              return Jacobian{(theta(r + h) - theta(std::max(r - h, 0.0))) / (r + h - std::max(r - h, 0.0)), false};
            }
            // r e'(r) from implicit differentiation of the defining relation.
            const double r_de = -0.2 * v.a * r15 * std::pow(ev, 0.6) / denom;
            return Jacobian{ev + r_de, false};
          },
      },
      kind_);
}

double RestitutionModel::invert_theta(double y) const {
  if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("invert_theta needs finite y >= 0");
  if (y == 0.0) return 0.0;
  if (const auto* c = std::get_if<ConstantRestitution>(&kind_)) return y / c->e0;
  if (const auto* p = std::get_if<PowerLawRestitution>(&kind_)) {
    // theta' = 1 - alpha (1 + gamma) r^gamma vanishes before the floor is
    // reached unless e_floor >= gamma / (1 + gamma).
    if (p->alpha > 0.0 && (!p->e_floor || *p->e_floor < p->gamma / (1.0 + p->gamma))) {
      throw InvariantError("invert_theta: impact map is not monotone (" + describe() + ")");
    }
  }

  const double tol = 1e-12 * std::max(1.0, y);
  double lo = 0.0, hi = y;
  double theta_hi = theta(hi);
  for (int iter = 0; theta_hi < y; ++iter) {
    const double next = theta(2.0 * hi);
    if (!(next > theta_hi) || iter > 2000) {
      throw InvariantError("invert_theta: impact map is not increasing on the bracket (" + describe() + ")");
    }
    lo = hi;
    hi *= 2.0;
    theta_hi = next;
  }

  double r = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double f = theta(r) - y;
    if (std::abs(f) <= tol) return r;
    if (f > 0) hi = r;
    else lo = r;
    const double d = jacobian(r).value;
    double next = d > 0 ? r - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r) break;
    r = next;
  }
  const double residual = std::abs(theta(r) - y);
  if (residual <= tol) return r;
  throw NumericError("invert_theta did not reach tolerance", r);
}

double nominal_gamma(const RestitutionModel& model) {
  if (const auto* p = std::get_if<PowerLawRestitution>(&model.kind())) return p->gamma;
  if (std::holds_alternative<ViscoelasticRestitution>(model.kind())) return 0.2;
  return 0.0;
}

double ell_gamma(const RestitutionModel& model, double gamma, std::span<const double> grid) {
  if (!(gamma > 0.0)) throw DomainError("ell_gamma needs gamma > 0; use ell_zero for gamma = 0");
  if (grid.empty()) throw DomainError("ell_gamma needs a non-empty grid");
  double sup = -std::numeric_limits<double>::infinity();
  for (double r : grid) {
    if (r <= 0) continue;
    sup = std::max(sup, (1.0 - model.e(r)) / std::pow(r, gamma));
  }
  return sup;
}

double ell_zero(const RestitutionModel& model, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("ell_zero needs a non-empty grid");
  double sup = -std::numeric_limits<double>::infinity();
  for (double r : grid) sup = std::max(sup, 1.0 - model.e(r));
  return sup;
}

namespace {

// Grid points within the decade ending at the largest (or starting at the
// smallest) grid value.
std::vector<double> edge_decade(std::span<const double> grid, bool largest) {
  std::vector<double> out;
  if (grid.empty()) return out;
  const double lo = grid.front(), hi = grid.back();
  for (double r : grid) {
    if (largest ? r >= hi / 10.0 : r <= lo * 10.0) out.push_back(r);
  }
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const RestitutionModel& model, std::span<const double> grid) {
  if (grid.size() < 2) throw DomainError("check_assumptions needs a grid of at least two points");
  AssumptionReport rep;

  // e(r) in (0, 1]
  rep.positivity.pass = true;
  rep.positivity.margin = std::numeric_limits<double>::infinity();
  for (double r : grid) {
    const double ev = model.e(r);
    const double margin = std::min(ev, 1.0 - ev);
    if (margin < rep.positivity.margin) {
      rep.positivity.margin = margin;
      rep.positivity.witness = r;
    }
    if (!(ev > 0.0 && ev <= 1.0)) rep.positivity.pass = false;
  }
  // The upper end e = 1 is allowed; report the positivity margin alone when it passes.
  if (rep.positivity.pass) {
    rep.positivity.margin = std::numeric_limits<double>::infinity();
    for (double r : grid) {
      const double ev = model.e(r);
      if (ev < rep.positivity.margin) {
        rep.positivity.margin = ev;
        rep.positivity.witness = r;
      }
    }
  }

  // theta strictly increasing: smallest relative successive difference.
  rep.theta_increasing.pass = true;
  rep.theta_increasing.margin = std::numeric_limits<double>::infinity();
  double prev = model.theta(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = model.theta(grid[i]);
    const double rel = (cur - prev) / std::max(std::abs(cur), std::abs(prev));
    if (rel < rep.theta_increasing.margin) {
      rep.theta_increasing.margin = rel;
      rep.theta_increasing.witness = grid[i - 1];
    }
    if (!(cur > prev)) rep.theta_increasing.pass = false;
    prev = cur;
  }

  // limsup e < 1, read off the largest decade.
  const auto top = edge_decade(grid, true);
  double emax = -std::numeric_limits<double>::infinity();
  for (double r : top) {
    const double ev = model.e(r);
    if (ev > emax) {
      emax = ev;
      rep.limsup_below_one.witness = r;
    }
  }
  rep.limsup_below_one.margin = 1.0 - emax;
  rep.limsup_below_one.pass = emax < 1.0;

  const ShapeReport shape = verify_psi_shape(model, grid);
  rep.psi_shape.pass = shape.monotone && shape.convex;
  rep.psi_shape.witness = !shape.monotone ? shape.monotone_witness : shape.convex_witness;
  rep.psi_shape.margin = std::min(shape.monotone_margin, shape.convex_margin);

  // Small-speed exponent: slope of log(1 - e) against log r on the smallest decade.
  const auto bottom = edge_decade(grid, false);
  std::vector<double> lx, ly;
  for (double r : bottom) {
    const double d = 1.0 - model.e(r);
    if (d > 0 && r > 0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(d));
    }
  }
  rep.gamma_detected = 0.0;
  if (lx.size() >= 2) {
    const double slope = fit_line(lx, ly).slope;
    rep.gamma_detected = std::abs(slope) < 1e-9 ? 0.0 : slope;
  }

  // Large-y growth of the inverse map: theta^{-1}(y) ~ C y^m, with y = theta(r)
  // on the largest decade so that theta^{-1}(y) = r exactly.
  lx.clear();
  ly.clear();
  for (double r : top) {
    const double th = model.theta(r);
    if (th > 0) {
      lx.push_back(std::log(th));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2 && lx.size() == top.size()) {
    rep.m_detected = fit_line(lx, ly).slope;
    rep.c_large = 0.0;
    for (double r : top) rep.c_large = std::max(rep.c_large, r / std::pow(model.theta(r), rep.m_detected));
    rep.growth_ok = rep.m_detected >= 1.0 + rep.gamma_detected / 2.0 - 1e-6;
  } else {
    rep.m_detected = std::numeric_limits<double>::quiet_NaN();
    rep.c_large = std::numeric_limits<double>::quiet_NaN();
    rep.growth_ok = false;
  }

  rep.ell = rep.gamma_detected > 0 ? ell_gamma(model, rep.gamma_detected, grid) : ell_zero(model, grid);
  return rep;
}

}  // namespace granular
