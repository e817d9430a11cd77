#include "sedsim/conjecture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace sedsim {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

bool density_domain(double E, double L) {
  if (!(E < 0.0) || L < 0.0) return false;
  const double R = -1.0 / E;
  return L <= std::sqrt(0.5 * R);
}

double density_f(double E, double L) {
  if (!density_domain(E, L)) return 0.0;
  const double R = -1.0 / E;
  return 2.0 / (kPi * kPi * kPi) * L * R * R * R * std::exp(-2.0 * R);
}

double pdf_E(double E) {
  if (!(E < 0.0)) return 0.0;
  const double a = -E;
  return (4.0 / 3.0) * std::pow(a, -6.0) * std::exp(-2.0 / a);
}

double pdf_eps(double eps) {
  if (eps < 0.0 || eps >= 1.0) return 0.0;
  return 3.0 * eps * std::sqrt(1.0 - eps * eps);
}

double pdf_kappa(double kappa) {
  if (kappa <= 0.0 || kappa > 1.0) return 0.0;
  return 3.0 * kappa * kappa;
}

double pdf_r(double r) {
  if (r < 0.0) return 0.0;
  return 4.0 * r * r * std::exp(-2.0 * r);
}

double pdf_R(double R) {
  if (R < 0.0) return 0.0;
  return (4.0 / 3.0) * R * R * R * R * std::exp(-2.0 * R);
}

double pdf_EL(double E, double L) {
  if (!density_domain(E, L)) return 0.0;
  const double a = -E;
  return 8.0 * std::numbers::sqrt2 * L * L * std::pow(a, -4.5) * std::exp(-2.0 / a);
}

double pdf_p(double p) {
  if (p <= 0.0) return 0.0;
  const double h = 0.5 * p * p;
  auto integrand = [h](double R) {
    if (!(R < 1e3)) return 0.0;  // exp(-2R) underflows
    const double d = 1.0 + h * R;
    const double d2 = d * d;
    return std::pow(R, 6) * std::exp(-2.0 * R) / (d2 * d2 * d);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double I = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  return 2.0 * p / kPi * I;
}

double sampler_lhs(double R) {
  const double poly = 1.0 + R * (2.0 + R * (2.0 + R * (4.0 / 3.0 + R * (2.0 / 3.0))));
  return poly * std::exp(-2.0 * R);
}

double cdf_R(double R) { return R <= 0.0 ? 0.0 : 1.0 - sampler_lhs(R); }
double cdf_E(double E) { return E >= 0.0 ? 1.0 : cdf_R(-1.0 / E); }

double cdf_eps(double eps) {
  if (eps <= 0.0) return 0.0;
  if (eps >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - eps * eps, 1.5);
}

double cdf_kappa(double kappa) {
  if (kappa <= 0.0) return 0.0;
  if (kappa >= 1.0) return 1.0;
  return kappa * kappa * kappa;
}

double cdf_r(double r) {
  if (r <= 0.0) return 0.0;
  return 1.0 - std::exp(-2.0 * r) * (1.0 + 2.0 * r + 2.0 * r * r);
}

double mean_eps() { return 3.0 * kPi / 16.0; }

double solve_sampler_radius(double u1) {
  if (!(u1 > 0.0 && u1 < 1.0)) throw std::domain_error("sampler: u1 must lie in (0, 1)");
  double lo = 1e-8;
  double hi = 50.0;
  if (!(sampler_lhs(lo) >= u1 && sampler_lhs(hi) <= u1)) {
    throw std::domain_error("sampler: root for u1 = " + std::to_string(u1) +
                            " lies outside the bracket [1e-8, 50]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sampler_lhs(mid) > u1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double R = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = pdf_R(R);
    if (!(d > 0.0)) break;
    const double next = R + (sampler_lhs(R) - u1) / d;  // d/dR lhs = -pdf_R
    if (!(next > lo && next < hi)) break;
    R = next;
  }
  if (!std::isfinite(R)) throw std::domain_error("sampler: root finder did not converge");
  return R;
}

InitialCondition sample_initial_conditions(double u1, double u2, CounterRng& rng) {
  if (!(u2 > 0.0 && u2 < 1.0)) throw std::domain_error("sampler: u2 must lie in (0, 1)");
  InitialCondition ic;
  ic.R = solve_sampler_radius(u1);
  ic.kappa = std::cbrt(u2);
  ic.eps = std::sqrt(1.0 - ic.kappa * ic.kappa);
  ic.E = -1.0 / ic.R;
  ic.L = ic.kappa * std::sqrt(0.5 * ic.R);

  const Vec3 l_hat = rng.unit_vector();
  const Vec3 axis = std::abs(l_hat.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 e1 = cross(l_hat, axis) / norm(cross(l_hat, axis));
  const Vec3 e2 = cross(l_hat, e1);
  const double phi = 2.0 * kPi * rng.uniform();
  const Vec3 peri_hat = std::cos(phi) * e1 + std::sin(phi) * e2;
  ic.at_perihelion = rng.uniform() < 0.5;

  const double radius = ic.at_perihelion ? perihelion_radius(ic.R, ic.eps)
                                         : aphelion_radius(ic.R, ic.eps);
  const Vec3 r_hat = ic.at_perihelion ? peri_hat : -peri_hat;
  ic.point.r = radius * r_hat;
  ic.point.v = (ic.L / radius) * cross(l_hat, r_hat);
  return ic;
}

InitialCondition sample_initial_conditions(CounterRng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return sample_initial_conditions(u1, u2, rng);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample set");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("ks_critical_value: n = 0");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

HistogramReport histogram_compare(std::span<const double> samples,
                                  const std::function<double(double)>& pdf,
                                  const std::function<double(double)>& cdf, double lo, double hi,
                                  std::size_t bins) {
  if (samples.empty()) throw std::invalid_argument("histogram_compare: empty sample set");
  if (bins < 2) throw std::invalid_argument("histogram_compare: need at least 2 bins");
  if (!(hi > lo)) throw std::invalid_argument("histogram_compare: need hi > lo");
  HistogramReport rep;
  rep.lo = lo;
  rep.hi = hi;
  rep.n_total = samples.size();
  const double width = (hi - lo) / static_cast<double>(bins);
  rep.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) rep.edges[b] = lo + width * static_cast<double>(b);
  rep.counts.assign(bins, 0);
  for (double x : samples) {
    if (!(x >= lo && x < hi)) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    ++rep.counts[b];
    ++rep.n_in_range;
  }
  rep.heights.assign(bins, 0.0);
  rep.overlay.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    if (rep.n_in_range > 0) {
      rep.heights[b] = static_cast<double>(rep.counts[b]) /
                       (static_cast<double>(rep.n_in_range) * (rep.edges[b + 1] - rep.edges[b]));
    }
    rep.overlay[b] = pdf ? pdf(0.5 * (rep.edges[b] + rep.edges[b + 1])) : 0.0;
  }
  if (cdf) {
    rep.ks = ks_statistic(samples, cdf);
    rep.ks_critical = ks_critical_value(samples.size());
  }
  return rep;
}

MarginalEstimate marginal_position_density(double r, std::uint64_t samples, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("marginal_position_density: r must be positive");
  if (samples == 0) throw std::invalid_argument("marginal_position_density: no samples");
  const double p_max = std::sqrt(2.0 / r);
  const double volume = 4.0 / 3.0 * kPi * p_max * p_max * p_max;
  const Vec3 rv{r, 0.0, 0.0};

  // Fixed blocks so the result does not depend on the thread count.
  constexpr std::uint64_t kBlock = 1u << 16;
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks, 0.0);
  std::vector<double> sum2(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::uint64_t b = 0; b < blocks; ++b) {
    CounterRng rng(derive_seed(seed, b));
    const std::uint64_t end = std::min(samples, (b + 1) * kBlock);
    double s = 0.0;
    double s2 = 0.0;
    for (std::uint64_t i = b * kBlock; i < end; ++i) {
      const Vec3 dir = rng.unit_vector();
      const double p = p_max * std::cbrt(rng.uniform());
      const Vec3 pv = p * dir;
      const double E = 0.5 * p * p - 1.0 / r;
      double f = 0.0;
      if (E < 0.0) {
        // L <= L_max holds exactly; clip the rounding excess.
        const double L = std::min(norm(cross(rv, pv)), std::sqrt(-0.5 / E));
        f = density_f(E, L);
      }
      s += f;
      s2 += f * f;
    }
    sum[b] = s;
    sum2[b] = s2;
  }
  double s = 0.0;
  double s2 = 0.0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sum2[b];
  }
  const double n = static_cast<double>(samples);
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return {volume * mean, volume * std::sqrt(var / n)};
}

}  // namespace sedsim
