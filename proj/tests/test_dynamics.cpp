#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sedsim/dynamics.hpp"
#include "sedsim/field.hpp"
#include "sedsim/integrator.hpp"
#include "sedsim/interpolation.hpp"

using namespace sedsim;

namespace {
constexpr double kPi = std::numbers::pi;

struct Osc {
  double x, v;
  friend Osc operator+(const Osc& a, const Osc& b) { return {a.x + b.x, a.v + b.v}; }
  friend Osc operator*(double s, const Osc& a) { return {s * a.x, s * a.v}; }
};
}

TEST_CASE("Coulomb force") {
  CHECK(coulomb_force({1, 0, 0}) == Vec3{-1, 0, 0});
  const Vec3 f = coulomb_force({0, 2, 0});
  CHECK(f.y == doctest::Approx(-0.25));
  CHECK(f.x == 0.0);
  CHECK_THROWS_AS(coulomb_force({0, 0, 0}), NumericalAbort);
  // Rate equals the finite-difference derivative along a trajectory.
  const Vec3 r{0.7, -0.3, 0.2}, v{0.1, 0.9, -0.4};
  const double h = 1e-6;
  const Vec3 fd = (coulomb_force(r + h * v) - coulomb_force(r - h * v)) / (2 * h);
  CHECK(norm(fd - coulomb_force_rate(r, v)) < 1e-8);
}

TEST_CASE("orbit elements") {
  const OrbitElements c = orbit_elements({1, 0, 0}, {0, 1, 0});
  CHECK(c.E == doctest::Approx(-0.5));
  CHECK(c.L_vec == Vec3{0, 0, 1});
  CHECK(c.eps == doctest::Approx(0.0));
  CHECK(*c.R == doctest::Approx(2.0));
  CHECK(*c.kappa == doctest::Approx(1.0));
  const OrbitElements e = orbit_elements({2, 0, 0}, {0, 0.5, 0});
  CHECK(e.E == doctest::Approx(-0.375));
  CHECK(e.L == doctest::Approx(1.0));
  CHECK(e.eps == doctest::Approx(0.5));
  const OrbitElements u = orbit_elements({1, 0, 0}, {0, 2, 0});
  CHECK_FALSE(u.bound());
  CHECK_FALSE(u.R.has_value());
}

TEST_CASE("orbital wavenumber, period and geometry") {
  CHECK(orbital_wavenumber(-0.5) == doctest::Approx(1.0));
  CHECK(orbital_period(-0.5) == doctest::Approx(2 * kPi));
  const double k = orbital_wavenumber(-1.0 / 3.0);
  CHECK(k == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(k * k * k == doctest::Approx(0.5443).epsilon(1e-4));
  CHECK(orbital_wavenumber(-2.0) == doctest::Approx(2.0));
  CHECK(std::pow(orbital_wavenumber(-2.0), 3) == doctest::Approx(8.0));
  CHECK_THROWS_AS(orbital_wavenumber(0.0), std::domain_error);
  for (double phi : {0.0, 1.0, 2.5}) CHECK(orbit_geometry(3.0, 0.0, phi) == doctest::Approx(1.5));
  CHECK(orbit_geometry(2.0, 0.5, 0.0) == doctest::Approx(0.5));
  CHECK(orbit_geometry(2.0, 0.5, kPi) == doctest::Approx(1.5));
  CHECK(perihelion_radius(2.0, 0.5) == doctest::Approx(0.5));
  CHECK(aphelion_radius(2.0, 0.5) == doctest::Approx(1.5));
}

TEST_CASE("constants") {
  const PhysicalConstants c = PhysicalConstants::from_charge(3);
  CHECK(c.beta == doctest::Approx(std::sqrt(2.0 / 3.0) * 3 * std::pow(kFineStructure, 1.5)));
  CHECK(c.damping_time() == doctest::Approx(1.0 / (c.beta * c.beta)));
  CHECK(c.cutoff_scale() == doctest::Approx(9 * kFineStructure * kFineStructure));
  CHECK_THROWS(PhysicalConstants::from_charge(0));
}

TEST_CASE("formulation names round-trip") {
  for (Formulation f : {Formulation::newton, Formulation::s_form, Formulation::pure_gc,
                        Formulation::mixed}) {
    CHECK(parse_formulation(to_string(f)) == f);
  }
  CHECK_THROWS(parse_formulation("canonical"));
}

TEST_CASE("zero force and zero field give straight-line motion") {
  PhysicalConstants c = PhysicalConstants::from_charge(1).with_beta(0.0);
  const PhaseState s{Formulation::newton, {1e9, 0, 0}, {0, 1, 0}, 0.0};
  const PhaseDerivative d = rhs_newton(s, {}, c);
  CHECK(d.dx == Vec3{0, 1, 0});
  CHECK(norm(d.dy) < 1e-17);
}

TEST_CASE("initial mapping reproduces the physical start in every formulation") {
  const auto f = FieldRealization::build(3, FrequencyGrid{100, 2000}, 5.3e-5);
  const PhysicalConstants c = PhysicalConstants::from_charge(1);
  const PhysicalPoint start{{0.9, 0.2, -0.1}, {-0.1, 1.05, 0.2}};
  for (Formulation form : {Formulation::newton, Formulation::s_form, Formulation::pure_gc,
                           Formulation::mixed}) {
    const FieldWindow w = make_window(f.grid(), form == Formulation::mixed ? 60 : 0, 1500);
    const BandValues bv = band_values(f, w, 0.4);
    const FieldInput in{eval_E(f, w.full_band(), 0.4), bv.a_low, bv.c_high, bv.a_high};
    const PhaseState s = initial_phase_state(form, start, 0.4, in, {}, c, InitialMapping::exact);
    const PhysicalPoint p = physical_point(s, in, {}, c);
    CHECK(norm(p.r - start.r) < 1e-14);
    CHECK(norm(p.v - start.v) < 1e-14);
  }
}

TEST_CASE("at beta = 0 every formulation is Kepler") {
  const PhysicalConstants c = PhysicalConstants::from_charge(1).with_beta(0.0);
  const PhysicalPoint start{{1, 0, 0}, {0, 1.1, 0}};
  const FieldInput junk{{0.3, 0.1, 0}, {0.2, 0, 0.1}, {1, 2, 3}, {0.5, 0.5, 0.5}};
  for (Formulation form : {Formulation::s_form, Formulation::pure_gc, Formulation::mixed}) {
    const PhaseState s = initial_phase_state(form, start, 0.0, junk, {}, c, InitialMapping::exact);
    const PhaseDerivative d = rhs(s, junk, {}, c);
    const PhysicalPoint p = physical_point(s, junk, {}, c);
    CHECK(norm(p.r - start.r) == 0.0);
    // r'' = f(r)
    CHECK(norm(d.dy - coulomb_force(start.r)) < 1e-15);
  }
}

TEST_CASE("RK4 on the harmonic oscillator") {
  Osc y{1.0, 0.0};
  const int n = 4000;
  const double dt = 2 * kPi / n;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    y = rk4_generic(y, t, dt, [](double, const Osc& z) { return Osc{z.v, -z.x}; });
    t += dt;
  }
  CHECK(std::abs(0.5 * (y.x * y.x + y.v * y.v) - 0.5) < 1e-12);
  PhaseState s{Formulation::newton, {1, 0, 0}, {0, 1, 0}, 0.0};
  CHECK_THROWS_AS(rk4_step(s, 0.0, [](double) { return FieldInput{}; }, {},
                           PhysicalConstants::from_charge(1)),
                  std::invalid_argument);
}

TEST_CASE("ionisation detector") {
  auto series = [](double E0, double len, double step) {
    std::vector<Sample> s;
    for (double t = 0.0; t <= len; t += step) s.push_back({t, E0, 0, 0, 1, 0});
    return s;
  };
  CHECK_FALSE(detect_ionisation(series(-0.5, 2e7, 1e5), -0.05, 1e7));
  auto hi = series(-0.5, 1e6, 1e5);
  for (double t = 1.1e6; t <= 1.3e7; t += 1e5) hi.push_back({t, -0.01, 0, 0, 1, 0});
  const auto ion = detect_ionisation(hi, -0.05, 1e7);
  REQUIRE(ion);
  CHECK(*ion == doctest::Approx(1.1e6));
  std::vector<Sample> dip;
  for (double t = 0.0; t <= 0.9e7; t += 1e5) dip.push_back({t, -0.01, 0, 0, 1, 0});
  dip.push_back({0.91e7, -0.2, 0, 0, 1, 0});
  for (double t = 0.92e7; t <= 1.5e7; t += 1e5) dip.push_back({t, -0.3, 0, 0, 1, 0});
  CHECK_FALSE(detect_ionisation(dip, -0.05, 1e7));
}

TEST_CASE("energy floor") {
  const PhysicalConstants c = PhysicalConstants::from_charge(1).with_beta(0.0);
  IntegratorConfig cfg;
  CounterRng rng(1);
  // |r| = 0.4 and E = -2: v^2 / 2 = 0.5.
  const Vec3 v0{0.0, 0.6, 0.8};
  PhaseState s{Formulation::newton, {0.4, 0, 0}, v0, 0.0};
  const PushResult p = apply_energy_floor(s, {}, {}, c, cfg, rng);
  CHECK(p.applied);
  CHECK(p.E_before == doctest::Approx(-2.0));
  CHECK(p.E_after == doctest::Approx(-1.6).epsilon(1e-14));
  CHECK(norm(cross(s.y, v0)) < 1e-15);
  CHECK(dot(s.y, v0) > 0.0);

  PhaseState q{Formulation::newton, {1.0, 0, 0}, {0, 1, 0}, 0.0};
  const PushResult none = apply_energy_floor(q, {}, {}, c, cfg, rng);
  CHECK_FALSE(none.applied);
  CHECK(q.y == Vec3{0, 1, 0});

  // s-form: the push keeps the physical position.
  const PhysicalConstants cb = PhysicalConstants::from_charge(1);
  const FieldInput in{{}, {}, {0.2, 0.1, 0.0}, {0.0, 0.3, 0.1}};
  PhaseState ss = initial_phase_state(Formulation::s_form, {{0.4, 0, 0}, v0}, 0.0, in, {}, cb,
                                      InitialMapping::exact);
  const Vec3 r_before = physical_point(ss, in, {}, cb).r;
  CHECK(apply_energy_floor(ss, in, {}, cb, cfg, rng).applied);
  const PhysicalPoint after = physical_point(ss, in, {}, cb);
  CHECK(norm(after.r - r_before) < 1e-15);
  CHECK(0.5 * norm2(after.v) - 1.0 / norm(after.r) == doctest::Approx(-1.6).epsilon(1e-12));

  PhaseState zero{Formulation::newton, {0.4, 0, 0}, {0, 0, 0}, 0.0};
  const PushResult pz = apply_energy_floor(zero, {}, {}, c, cfg, rng);
  CHECK(pz.applied);
  CHECK(pz.E_after == doctest::Approx(-1.6).epsilon(1e-14));
}

TEST_CASE("cutoff windows") {
  const FrequencyGrid g{1000, 1000000};
  IntegratorConfig cfg;
  cfg.cutoff = CutoffPolicy::moving;
  const double k3 = 1.0;
  CHECK_FALSE(moving_cutoff_controller(-0.5, k3, Formulation::s_form, g, cfg));
  // k^3 up by 20%: E = -(1.2^(2/3))/2.
  const double E = -0.5 * std::pow(1.2, 2.0 / 3.0);
  const auto b = moving_cutoff_controller(E, k3, Formulation::s_form, g, cfg);
  REQUIRE(b);
  CHECK(b->first == 0);
  CHECK(b->second == 3000);  // 2.5 * 1.2 * N
  const auto base = moving_window_bounds(1.0, Formulation::s_form, g, 2.5);
  CHECK(base.second == 2500);
  const auto mixed = moving_window_bounds(1.0, Formulation::mixed, g, 2.5);
  CHECK(mixed.first == 1000);
  CHECK(mixed.second == 3000);
  const auto fixed = fixed_window_bounds(Formulation::mixed, FrequencyGrid{10000, 100000});
  CHECK(fixed.second == static_cast<std::size_t>(std::llround(1.5 * std::pow(3.2, 1.5) * 1e4)));
  CHECK(fixed.first == static_cast<std::size_t>(std::llround(0.5443310539518174 * 1e4)));
}

TEST_CASE("integrator config validation names the key") {
  IntegratorConfig c;
  c.steps_per_orbit = 0;
  try {
    c.validate();
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).rfind("steps_per_orbit", 0) == 0);
  }
}
