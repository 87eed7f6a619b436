#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "granular/error.hpp"

namespace granular::quad {

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre15 {
  std::array<double, 15> nodes;
  std::array<double, 15> weights;
};

const GaussLegendre15& gauss_legendre_15();

struct Result {
  double value = 0.0;
  double error = 0.0;  // summed |coarse - refined| over accepted panels
  std::size_t panels = 0;
};

template <class F>
double panel(F&& f, double a, double b) {
  const auto& rule = gauss_legendre_15();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

/// Adaptive Gauss-Legendre quadrature of f over [a, b].
///
/// Globally adaptive: every panel carries the disagreement between its
/// 15-point value and the sum over its two halves, and the panel with the
/// largest disagreement is bisected until the total is below `abs_tol`.
/// Panels at rounding level or too narrow to split are frozen. Throws
/// NumericError (carrying the current estimate) after `max_panels` panels.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, std::size_t max_panels = 20000) {
  Result out;
  if (a == b) return out;
  struct Panel {
    double a, b, left, right, err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto make = [&](double lo, double hi, double whole) {
    const double mid = 0.5 * (lo + hi);
    const double l = panel(f, lo, mid), r = panel(f, mid, hi);
    return Panel{lo, hi, l, r, std::abs(l + r - whole)};
  };

  std::priority_queue<Panel> active;
  active.push(make(a, b, panel(f, a, b)));
  double active_err = active.top().err;
  std::size_t panels = 1;
  while (!active.empty() && active_err > abs_tol) {
    const Panel p = active.top();
    active.pop();
    active_err -= p.err;
    const double mid = 0.5 * (p.a + p.b);
    const bool splittable = mid > p.a && mid < p.b && 0.5 * (p.a + mid) > p.a && 0.5 * (mid + p.b) < p.b;
    const bool at_rounding = p.err <= 64.0 * eps * (std::abs(p.left) + std::abs(p.right));
    if (!splittable || at_rounding) {
      out.value += p.left + p.right;
      out.error += p.err;
      ++out.panels;
      continue;
    }
    if (++panels > max_panels) {
      double estimate = out.value + p.left + p.right;
      for (; !active.empty(); active.pop()) estimate += active.top().left + active.top().right;
      throw NumericError("adaptive quadrature did not converge", estimate);
    }
    const Panel lo = make(p.a, mid, p.left), hi = make(mid, p.b, p.right);
    active.push(lo);
    active.push(hi);
    active_err += lo.err + hi.err;
    if (active_err <= abs_tol) {
      // Guard against drift in the running sum before stopping.
      std::priority_queue<Panel> copy = active;
      active_err = 0.0;
      for (; !copy.empty(); copy.pop()) active_err += copy.top().err;
    }
  }
  for (; !active.empty(); active.pop()) {
    out.value += active.top().left + active.top().right;
    out.error += active.top().err;
    ++out.panels;
  }
  return out;
}

}  // namespace granular::quad
