#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sedsim/conjecture.hpp"

using namespace sedsim;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

TEST_CASE("marginal densities are normalised") {
  CHECK(integrate(pdf_eps, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate(pdf_kappa, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate(pdf_r, 0.0, 60.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate(pdf_R, 0.0, 60.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate(pdf_E, -40.0, -1e-3) == doctest::Approx(1.0).epsilon(1e-8));
  boost::math::quadrature::exp_sinh<double> es;
  const double mom = es.integrate([](double p) { return 4 * kPi * p * p * pdf_p(p); });
  CHECK(mom == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(integrate([](double e) { return e * pdf_eps(e); }, 0.0, 1.0) ==
        doctest::Approx(mean_eps()).epsilon(1e-10));
  CHECK(mean_eps() == doctest::Approx(3 * kPi / 16));
}

TEST_CASE("CDFs match integrated densities") {
  for (double x : {0.1, 0.5, 0.9}) {
    CHECK(cdf_eps(x) == doctest::Approx(integrate(pdf_eps, 0.0, x)).epsilon(1e-10));
    CHECK(cdf_kappa(x) == doctest::Approx(x * x * x));
  }
  for (double r : {0.3, 1.0, 4.0}) {
    CHECK(cdf_r(r) == doctest::Approx(integrate(pdf_r, 0.0, r)).epsilon(1e-10));
    CHECK(cdf_R(r) == doctest::Approx(integrate(pdf_R, 0.0, r)).epsilon(1e-10));
  }
  for (double E : {-2.0, -0.5, -0.1}) {
    CHECK(cdf_E(E) == doctest::Approx(integrate(pdf_E, -60.0, E)).epsilon(1e-8));
  }
  CHECK(cdf_E(0.0) == 1.0);
}

TEST_CASE("joint density and its support") {
  CHECK(density_f(0.5, 0.1) == 0.0);
  CHECK_FALSE(density_domain(-0.5, 1.5));
  CHECK(density_domain(-0.5, 0.9));
  // L integral of the joint law gives P_E.
  for (double E : {-1.0, -0.4}) {
    const double Lmax = std::sqrt(-1.0 / E / 2.0);
    const double m = integrate([E](double L) { return pdf_EL(E, L); }, 0.0, Lmax);
    CHECK(m == doctest::Approx(pdf_E(E)).epsilon(1e-10));
  }
}

TEST_CASE("sampler radius inverts the gamma law") {
  // sampler_lhs(R) = Q(5, 2R), the regularised upper incomplete gamma.
  for (double R : {0.2, 1.0, 2.5, 7.0}) {
    CHECK(sampler_lhs(R) == doctest::Approx(boost::math::gamma_q(5.0, 2 * R)).epsilon(1e-13));
  }
  for (double u : {1e-6, 0.1, 0.5, 0.9, 0.999999}) {
    const double R = solve_sampler_radius(u);
    CHECK(R == doctest::Approx(0.5 * boost::math::gamma_q_inv(5.0, u)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(solve_sampler_radius(0.0), std::domain_error);
  CHECK_THROWS_AS(solve_sampler_radius(1.0), std::domain_error);
}

TEST_CASE("sampled initial conditions are consistent") {
  CounterRng rng(42);
  for (int i = 0; i < 200; ++i) {
    const InitialCondition ic = sample_initial_conditions(rng);
    const OrbitElements el = orbit_elements(ic.point.r, ic.point.v);
    CHECK(el.E == doctest::Approx(ic.E).epsilon(1e-12));
    CHECK(el.L == doctest::Approx(ic.L).epsilon(1e-12));
    CHECK(el.eps == doctest::Approx(ic.eps).scale(1.0).epsilon(1e-10));
    CHECK(ic.E == doctest::Approx(-1.0 / ic.R));
    CHECK(ic.kappa * ic.kappa + ic.eps * ic.eps == doctest::Approx(1.0));
    const double rp = ic.at_perihelion ? perihelion_radius(ic.R, ic.eps)
                                       : aphelion_radius(ic.R, ic.eps);
    CHECK(norm(ic.point.r) == doctest::Approx(rp).epsilon(1e-12));
  }
  const InitialCondition fixed = sample_initial_conditions(0.5, 0.125, rng);
  CHECK(fixed.kappa == doctest::Approx(0.5));
}

TEST_CASE("KS statistic and critical value") {
  CHECK(ks_critical_value(100000) == doctest::Approx(std::sqrt(-0.5 * std::log(0.005)) / std::sqrt(1e5)));
  CHECK(ks_critical_value(100000) == doctest::Approx(0.005147).epsilon(1e-3));
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
  CHECK(ks_statistic(grid, [](double x) { return x; }) == doctest::Approx(0.0005));
}

TEST_CASE("histogram normalisation") {
  CounterRng rng(5);
  std::vector<double> r;
  for (int i = 0; i < 20000; ++i) r.push_back(rng.uniform());
  const HistogramReport h =
      histogram_compare(r, [](double) { return 1.0; }, [](double x) { return x; }, 0.0, 1.0, 20);
  double area = 0.0;
  for (std::size_t i = 0; i < h.heights.size(); ++i) area += h.heights[i] * (h.edges[i + 1] - h.edges[i]);
  CHECK(std::abs(area - 1.0) < 1e-12);
  CHECK(h.n_in_range == 20000);
  CHECK(h.ks < h.ks_critical);
  CHECK_THROWS_AS(histogram_compare({}, pdf_r, cdf_r, 0.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("position marginal estimator") {
  const MarginalEstimate m = marginal_position_density(1.0, 200000, 3);
  CHECK(std::abs(m.value - std::exp(-2.0) / kPi) < 5 * m.std_error);
}
