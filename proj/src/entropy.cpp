#include "granular/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "granular/error.hpp"
#include "granular/quadrature.hpp"
#include "granular/stats.hpp"

namespace granular {

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using Point = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<Point, std::uint32_t>;

// Distance from each point to its k-th nearest other point.
std::vector<double> kth_neighbour_distances(std::span<const Vec3> pts, int k) {
  std::vector<Entry> entries;
  entries.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) entries.emplace_back(Point(pts[i].x, pts[i].y, pts[i].z), std::uint32_t(i));
  const bgi::rtree<Entry, bgi::rstar<16>> tree(entries.begin(), entries.end());

  std::vector<double> out(pts.size());
  std::vector<Entry> hits;
  std::vector<double> d2;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    hits.clear();
    tree.query(bgi::nearest(entries[i].first, unsigned(k + 1)), std::back_inserter(hits));
    d2.clear();
    bool self_skipped = false;
    for (const auto& h : hits) {
      if (!self_skipped && h.second == i) {
        self_skipped = true;
        continue;
      }
      d2.push_back(norm2(pts[h.second] - pts[i]));
    }
    // The query may return a coincident point in place of `i` itself.
    if (!self_skipped) d2.erase(std::min_element(d2.begin(), d2.end()));
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    out[i] = std::sqrt(d2[std::size_t(k - 1)]);
  }
  return out;
}

}  // namespace

EntropyEstimate entropy_knn(std::span<const Vec3> sample, int k, std::uint64_t seed) {
  if (k < 3) throw DomainError("entropy_knn needs k >= 3");
  const std::size_t n = sample.size();
  if (n < 10 * std::size_t(k)) throw DomainError("entropy_knn needs N >= 10 k");

  EntropyEstimate est;
  est.k = k;
  std::mt19937_64 jitter_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vec3> pts(sample.begin(), sample.end());
  std::vector<double> eps = kth_neighbour_distances(pts, k);

  // Exact ties give eps = 0; move the tied points by 1e-12 sqrt(E) and redo.
  for (int round = 0; round < 4; ++round) {
    if (std::none_of(eps.begin(), eps.end(), [](double d) { return d == 0.0; })) break;
    double energy = 0;
    for (const auto& v : pts) energy += norm2(v);
    energy /= double(n);
    const double amp = 1e-12 * std::sqrt(std::max(energy, std::numeric_limits<double>::min()));
    std::normal_distribution<double> g(0.0, amp);
    for (std::size_t i = 0; i < n; ++i) {
      if (eps[i] != 0.0) continue;
      pts[i] += Vec3{g(jitter_rng), g(jitter_rng), g(jitter_rng)};
      ++est.jittered;
    }
    eps = kth_neighbour_distances(pts, k);
  }
  if (std::any_of(eps.begin(), eps.end(), [](double d) { return d == 0.0; })) {
    throw NumericError("entropy_knn: ties persist after jitter");
  }

  using boost::math::digamma;
  const double offset = digamma(double(k)) - digamma(double(n)) - std::log(4.0 * std::numbers::pi / 3.0);
  std::vector<double> terms(n);
  double sum = 0, sum_abs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    terms[i] = offset - 3.0 * std::log(eps[i]);
    sum += terms[i];
    sum_abs += std::abs(terms[i]);
  }
  est.h_signed = sum / double(n);
  est.h_abs = sum_abs / double(n);

  std::mt19937_64 boot(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  constexpr int resamples = 16;
  double m = 0, m2 = 0;
  for (int b = 0; b < resamples; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += terms[pick(boot)];
    s /= double(n);
    m += s;
    m2 += s * s;
  }
  m /= resamples;
  est.stderr_signed = std::sqrt(std::max(0.0, (m2 / resamples - m * m) * resamples / (resamples - 1)));
  return est;
}

double lambert_w(double x) {
  constexpr double inv_e = 0.36787944117144232159552377016146;
  if (std::isnan(x) || x < -inv_e) throw DomainError("lambert_w needs x >= -1/e");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.25) {
    // Series about the branch point.
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = std::log1p(x);
    w = w * (1.0 - std::log1p(w) / (2.0 + w));
  } else {
    const double l1 = std::log(x), l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  if (x == -inv_e) return -1.0;

  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double sphere_area(int n) {
  if (n < 1) throw DomainError("sphere_area needs n >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double stretched_exponential_integral(int n, double k, double a) {
  return sphere_area(n) / k * std::pow(2.0 / a, n / k) * std::tgamma(n / k);
}

HbarBound hbar_bound(double h_signed, double m_k, int n, double k) {
  if (!(k > 0.0 && k < n)) throw DomainError("hbar_bound needs k in (0, n)");
  if (!(m_k > 0.0) || !std::isfinite(m_k)) throw DomainError("hbar_bound needs M_k > 0");
  auto objective = [&](double s) {
    const double a = std::exp(s);
    return h_signed + 2.0 * a * m_k + 2.0 * stretched_exponential_integral(n, k, a);
  };

  // Walk downhill from s = 0 with doubling steps to bracket the minimum.
  double step = 1.0;
  double s0 = 0.0, f0 = objective(s0);
  double dir = objective(s0 + step) < f0 ? 1.0 : -1.0;
  double lo = s0 - step, hi = s0 + step;
  for (int iter = 0; iter < 200; ++iter) {
    const double s1 = s0 + dir * step;
    const double f1 = objective(s1);
    if (!(f1 < f0)) {
      lo = std::min(s0 - dir * step, s1);
      hi = std::max(s0 - dir * step, s1);
      break;
    }
    s0 = s1;
    f0 = f1;
    step *= 2.0;
  }

  constexpr double inv_phi = 0.61803398874989484820;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = objective(c), fd = objective(d);
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  const double s = 0.5 * (lo + hi);
  return {objective(s), std::exp(s)};
}

double moment_lower_bound_constant(int n, double k, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("moment_lower_bound needs eps in (0, 1)");
  if (!(k >= 0.0)) throw DomainError("moment_lower_bound needs k >= 0");
  return eps * std::pow(n * (1.0 - eps) / sphere_area(n), k / n);
}

double moment_lower_bound(double h_abs, int n, double k, double eps) {
  const double c = moment_lower_bound_constant(n, k, eps);
  return c * std::exp(-k * h_abs / (n * (1.0 - eps)));
}

AnalyticDistribution maxwellian_distribution(double theta) {
  if (!(theta > 0.0)) throw DomainError("maxwellian_distribution needs theta > 0");
  AnalyticDistribution d;
  d.name = "maxwellian(theta=" + std::to_string(theta) + ")";
  const double log_norm = -1.5 * std::log(2.0 * std::numbers::pi * theta);
  d.h_signed = log_norm - 1.5;
  d.m1 = 2.0 * std::sqrt(2.0 * theta / std::numbers::pi);
  d.m2 = 3.0 * theta;

  // Radial quadrature of 4 pi r^2 f |log f|, split where log f changes sign.
  auto integrand = [&](double r) {
    const double lf = log_norm - r * r / (2.0 * theta);
    return 4.0 * std::numbers::pi * r * r * std::exp(lf) * std::abs(lf);
  };
  const double r_max = 40.0 * std::sqrt(theta);
  std::vector<double> cuts{0.0};
  if (log_norm > 0.0) cuts.push_back(std::sqrt(2.0 * theta * log_norm));
  cuts.push_back(r_max);
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += quad::integrate(integrand, cuts[i], cuts[i + 1], 1e-14 * (1.0 + std::abs(d.h_signed))).value;
  }
  d.h_abs = total;
  return d;
}

AnalyticDistribution uniform_ball_distribution(double radius) {
  if (!(radius > 0.0)) throw DomainError("uniform_ball_distribution needs R > 0");
  AnalyticDistribution d;
  d.name = "uniform_ball(R=" + std::to_string(radius) + ")";
  const double volume = 4.0 * std::numbers::pi * radius * radius * radius / 3.0;
  d.h_signed = -std::log(volume);
  d.h_abs = std::abs(d.h_signed);
  d.m1 = 0.75 * radius;
  d.m2 = 0.6 * radius * radius;
  return d;
}

namespace {

struct HermiteRule {
  std::vector<double> nodes, weights;  // for int exp(-x^2) g(x) dx
};

// Newton iteration on orthonormal Hermite polynomials.
HermiteRule gauss_hermite(int n) {
  HermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -1.0 / 6.0);
    else if (i == 1) z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2) z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3) z = 1.91 * z - 0.91 * rule.nodes[1];
    else z = 2.0 * z - rule.nodes[i - 2];
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace

AnalyticDistribution gaussian_mixture_distribution(std::span<const GaussianComponent> components, std::string name) {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  double wsum = 0;
  for (const auto& c : components) {
    if (!(c.weight > 0) || !(c.sigma > 0)) throw DomainError("mixture components need positive weight and sigma");
    wsum += c.weight;
  }
  auto log_density = [&](const Vec3& v) {
    // log-sum-exp over components
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(components.size());
    for (const auto& c : components) {
      const double s2 = c.sigma * c.sigma;
      const double l = std::log(c.weight / wsum) - 1.5 * std::log(2.0 * std::numbers::pi * s2) -
                       norm2(v - c.mean) / (2.0 * s2);
      logs.push_back(l);
      best = std::max(best, l);
    }
    double acc = 0;
    for (double l : logs) acc += std::exp(l - best);
    return best + std::log(acc);
  };

  static const HermiteRule rule = gauss_hermite(48);
  const double pi32 = std::pow(std::numbers::pi, 1.5);
  AnalyticDistribution d;
  d.name = std::move(name);
  for (const auto& c : components) {
    const double w = c.weight / wsum;
    const double scale = std::sqrt(2.0) * c.sigma;
    double h = 0, habs = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
          const double wt = rule.weights[i] * rule.weights[j] * rule.weights[l];
          if (wt < 1e-300) continue;
          const Vec3 v = c.mean + scale * Vec3{rule.nodes[i], rule.nodes[j], rule.nodes[l]};
          const double lf = log_density(v);
          h += wt * lf;
          habs += wt * std::abs(lf);
        }
    d.h_signed += w * h / pi32;
    d.h_abs += w * habs / pi32;
    // |v| is a noncentral chi variable with three degrees of freedom.
    const double lam = norm(c.mean) / c.sigma;
    const double mean_abs =
        lam < 1e-8 ? 2.0 * std::sqrt(2.0 / std::numbers::pi)
                   : std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * lam * lam) +
                         (lam + 1.0 / lam) * std::erf(lam / std::sqrt(2.0));
    d.m1 += w * c.sigma * mean_abs;
    d.m2 += w * (norm2(c.mean) + 3.0 * c.sigma * c.sigma);
  }
  return d;
}

InequalityReport check_inequalities(std::span<const AnalyticDistribution> family) {
  InequalityReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& d : family) {
    InequalityCheck row;
    row.name = d.name;
    row.m2 = d.m2;
    row.h_abs = d.h_abs;
    row.moment_bound = moment_lower_bound(d.h_abs, 3, 2.0, 0.5);
    row.hbar_k1 = hbar_bound(d.h_signed, d.m1, 3, 1.0).bound;
    row.hbar_k2 = hbar_bound(d.h_signed, d.m2, 3, 2.0).bound;
    const double s_moment = (d.m2 - row.moment_bound) / d.m2;
    const double s_k1 = (row.hbar_k1 - d.h_abs) / std::max(1.0, std::abs(row.hbar_k1));
    const double s_k2 = (row.hbar_k2 - d.h_abs) / std::max(1.0, std::abs(row.hbar_k2));
    const double s_sign = d.h_abs >= 0 ? std::numeric_limits<double>::infinity() : -1.0;
    row.slack = std::min({s_moment, s_k1, s_k2, s_sign});
    row.pass = row.slack >= 0.0;
    if (!row.pass) ++rep.violations;
    if (row.slack < rep.worst_slack) {
      rep.worst_slack = row.slack;
      rep.worst_name = row.name;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<AnalyticDistribution> standard_family(std::size_t mixtures, std::size_t balls, std::size_t maxwellians,
                                                  std::uint64_t seed) {
  std::vector<AnalyticDistribution> fam;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ncomp(2, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t m = 0; m < mixtures; ++m) {
    std::vector<GaussianComponent> comps(std::size_t(ncomp(rng)));
    for (auto& c : comps) {
      c.weight = 0.1 + unit(rng);
      c.mean = {6.0 * unit(rng) - 3.0, 6.0 * unit(rng) - 3.0, 6.0 * unit(rng) - 3.0};
      c.sigma = std::exp(std::log(0.05) + unit(rng) * std::log(100.0));
    }
    fam.push_back(gaussian_mixture_distribution(comps, "mixture#" + std::to_string(m)));
  }
  if (balls > 0) {
    for (double r : logspace(1e-3, 1e3, balls)) fam.push_back(uniform_ball_distribution(r));
  }
  if (maxwellians > 0) {
    for (double th : logspace(1e-3, 1e3, maxwellians)) fam.push_back(maxwellian_distribution(th));
  }
  return fam;
}

}  // namespace granular
