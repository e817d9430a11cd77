#pragma once

// Conjectured ground-state phase-space density and its marginals (Bohr units):
//
//   f(E, L) = (2 / pi^3) L R^3 exp(-2R),  R = -1/E,  0 <= L <= sqrt(R/2)
//   P_E = (4/3) |E|^-6 exp(-2/|E|)    P_eps = 3 eps sqrt(1 - eps^2)
//   P_kappa = 3 kappa^2               P_r = 4 r^2 exp(-2r)
//   P_p = (2p/pi) int_0^inf R^6 exp(-2R) / (1 + p^2 R / 2)^5 dR
//
// P_p is a density over 3-d momentum: 4 pi int p^2 P_p dp = 1.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sedsim/dynamics.hpp"
#include "sedsim/rng.hpp"

namespace sedsim {

/// Zero outside E < 0, 0 <= L <= sqrt(R/2).
double density_f(double E, double L);
/// True when (E, L) lies in the support of f.
bool density_domain(double E, double L);

double pdf_E(double E);
double pdf_eps(double eps);
double pdf_kappa(double kappa);
double pdf_r(double r);
/// (4/3) R^4 exp(-2R), the law of R = -1/E.
double pdf_R(double R);
/// Joint density of (E, L): 8 sqrt(2) L^2 |E|^(-9/2) exp(-2/|E|).
double pdf_EL(double E, double L);
double pdf_p(double p);

double cdf_R(double R);
double cdf_E(double E);
double cdf_eps(double eps);
double cdf_kappa(double kappa);
double cdf_r(double r);

/// Mean eccentricity under the conjecture, 3 pi / 16.
double mean_eps();

/// (1 + 2R + 2R^2 + (4/3)R^3 + (2/3)R^4) exp(-2R), strictly decreasing from 1.
double sampler_lhs(double R);
/// Root of sampler_lhs(R) = u1 by bisection on [1e-8, 50] and a Newton polish.
/// Throws std::domain_error if u1 is outside (0,1) or the root leaves the bracket.
double solve_sampler_radius(double u1);

struct InitialCondition {
  double R = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
  double E = 0.0;
  double L = 0.0;
  bool at_perihelion = true;
  PhysicalPoint point;
};

/// R from u1, kappa = u2^(1/3); L direction uniform on the sphere, perihelion
/// direction uniform in the orbital plane, perihelion or aphelion start by a
/// fair coin. Orientation draws come from `rng`.
InitialCondition sample_initial_conditions(double u1, double u2, CounterRng& rng);
/// Draws u1, u2 from `rng` first.
InitialCondition sample_initial_conditions(CounterRng& rng);

struct HistogramReport {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;    ///< bins + 1 entries
  std::vector<double> heights;  ///< normalised over in-range samples
  std::vector<double> overlay;  ///< pdf at bin centres
  std::vector<std::uint64_t> counts;
  std::uint64_t n_total = 0;
  std::uint64_t n_in_range = 0;
  double ks = 0.0;           ///< sup |F_emp - F| over all samples
  double ks_critical = 0.0;  ///< 1% critical value at n_total
};

/// Normalised histogram on [lo, hi) with pdf overlay and the KS statistic
/// against `cdf`. Throws std::invalid_argument for empty samples or bins < 2.
HistogramReport histogram_compare(std::span<const double> samples,
                                  const std::function<double(double)>& pdf,
                                  const std::function<double(double)>& cdf, double lo, double hi,
                                  std::size_t bins);

/// Kolmogorov-Smirnov statistic of the samples against `cdf`.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// Asymptotic critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha = 0.01);

struct MarginalEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of int d^3p f(E, L) at radius r, sampling p uniformly
/// in the bound ball |p| < sqrt(2/r). The exact result is exp(-2r)/pi.
MarginalEstimate marginal_position_density(double r, std::uint64_t samples, std::uint64_t seed);

}  // namespace sedsim
