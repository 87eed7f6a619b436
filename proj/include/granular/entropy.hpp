#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "granular/vec3.hpp"

namespace granular {

/// Entropy of a velocity distribution with the kinetic sign convention:
/// h_signed = int f log f (the negative differential entropy) and
/// h_abs = int f |log f|.
struct EntropyEstimate {
  double h_signed = 0.0;
  double h_abs = 0.0;
  double stderr_signed = 0.0;
  int k = 0;
  std::size_t jittered = 0;  // points moved to break exact ties
};

/// Kozachenko-Leonenko k-nearest-neighbour estimate from a 3D sample.
/// The per-point log-density surrogate is
///   psi(k) - psi(N) - log(4 pi / 3) - 3 log eps_k(i),
/// h_signed is its mean and h_abs the mean of its absolute value. The
/// standard error comes from 16 bootstrap resamples of the per-point terms.
/// Needs k >= 3 and N >= 10 k.
EntropyEstimate entropy_knn(std::span<const Vec3> sample, int k = 5, std::uint64_t seed = 0x5eed);

/// Principal branch of the Lambert W function, x >= -1/e.
double lambert_w(double x);

/// Surface area of the unit sphere in R^n.
double sphere_area(int n);

/// J_{n,k}(a) = int exp(-a |v|^k / 2) dv = |S^{n-1}| / k (2/a)^{n/k} Gamma(n/k).
double stretched_exponential_integral(int n, double k, double a);

struct HbarBound {
  double bound = 0.0;
  double a_opt = 0.0;
};

/// min over a > 0 of h_signed + 2 a M_k + 2 J_{n,k}(a): an upper bound on
/// int f |log f| (golden section on log a). k in (0, n).
HbarBound hbar_bound(double h_signed, double m_k, int n, double k);

/// C(n,k,eps) exp(-k H / (n (1 - eps))) with C = eps (n (1 - eps) / |S^{n-1}|)^{k/n}:
/// a lower bound on M_k for any unit-mass density with int f |log f| = H.
double moment_lower_bound(double h_abs, int n, double k, double eps);
double moment_lower_bound_constant(int n, double k, double eps);

/// A unit-mass 3D density with analytically or numerically exact functionals.
struct AnalyticDistribution {
  std::string name;
  double m1 = 0.0;        // int f |v|
  double m2 = 0.0;        // int f |v|^2
  double h_signed = 0.0;  // int f log f
  double h_abs = 0.0;     // int f |log f|
};

/// Isotropic Gaussian, per-component variance theta, via radial quadrature.
AnalyticDistribution maxwellian_distribution(double theta);
/// Uniform on the ball of radius R (closed forms).
AnalyticDistribution uniform_ball_distribution(double radius);

struct GaussianComponent {
  double weight;
  Vec3 mean;
  double sigma;  // isotropic standard deviation
};
/// Gaussian mixture. M_1 and M_2 are exact; H_signed and H_abs come from
/// tensor Gauss-Hermite quadrature against each component (the kink of
/// |log f| limits H_abs to about 1e-3 relative).
AnalyticDistribution gaussian_mixture_distribution(std::span<const GaussianComponent> components,
                                                   std::string name = "mixture");

struct InequalityCheck {
  std::string name;
  double m2 = 0.0;
  double h_abs = 0.0;
  double moment_bound = 0.0;  // explicit n=3, k=2, eps=1/2 bound on M_2
  double hbar_k1 = 0.0;       // upper bounds on h_abs via M_1 and M_2
  double hbar_k2 = 0.0;
  double slack = 0.0;  // smallest relative slack of the three inequalities
  bool pass = false;
};

struct InequalityReport {
  std::vector<InequalityCheck> rows;
  std::size_t violations = 0;
  double worst_slack = 0.0;
  std::string worst_name;
};

InequalityReport check_inequalities(std::span<const AnalyticDistribution> family);

/// The standard verification family: `mixtures` random Gaussian mixtures
/// (2-5 components, seeded), `balls` uniform balls with R on
/// logspace(-3, 3), and `maxwellians` scaled Gaussians with theta on logspace(-3, 3).
std::vector<AnalyticDistribution> standard_family(std::size_t mixtures = 100, std::size_t balls = 20,
                                                  std::size_t maxwellians = 13, std::uint64_t seed = 2024);

}  // namespace granular
