#include "sedsim/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sedsim {

PhysicalConstants PhysicalConstants::from_charge(int Z, double alpha) {
  if (Z < 1) throw std::invalid_argument("Z must be a positive integer, got " + std::to_string(Z));
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  PhysicalConstants c;
  c.Z = Z;
  c.alpha = alpha;
  c.beta = std::sqrt(2.0 / 3.0) * Z * std::pow(alpha, 1.5);
  return c;
}

PhysicalConstants PhysicalConstants::with_beta(double b) const {
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("beta must be finite and >= 0");
  PhysicalConstants c = *this;
  c.beta = b;
  return c;
}

double PhysicalConstants::damping_time() const {
  return beta > 0.0 ? 1.0 / (beta * beta) : std::numeric_limits<double>::infinity();
}

Vec3 coulomb_force(const Vec3& r) {
  const double r2 = norm2(r);
  if (!(r2 > 0.0)) throw NumericalAbort("Coulomb singularity at r = 0");
  const double rn = std::sqrt(r2);
  return r * (-1.0 / (r2 * rn));
}

Vec3 coulomb_force_rate(const Vec3& r, const Vec3& v) {
  const double r2 = norm2(r);
  if (!(r2 > 0.0)) throw NumericalAbort("Coulomb singularity at r = 0");
  const double rn = std::sqrt(r2);
  const double inv3 = 1.0 / (r2 * rn);
  const double vr = dot(v, r) / r2;  // (v.rhat)/r
  return (v - 3.0 * vr * r) * (-inv3);
}

OrbitElements orbit_elements(const Vec3& r, const Vec3& p) {
  const double rn = norm(r);
  if (!(rn > 0.0)) throw NumericalAbort("orbit_elements: r = 0");
  OrbitElements el;
  const double p2 = norm2(p);
  el.E = 0.5 * p2 - 1.0 / rn;
  el.L_vec = cross(r, p);
  el.L = norm(el.L_vec);
  el.eps_vec = p2 * r - dot(p, r) * p - r / rn;
  el.eps = norm(el.eps_vec);
  if (el.E < 0.0) {
    el.R = -1.0 / el.E;
    el.kappa = el.L / std::sqrt(0.5 * *el.R);
  }
  return el;
}

double orbital_wavenumber(double E) {
  if (!(E < 0.0)) throw std::domain_error("orbital_wavenumber: unbound energy");
  return std::sqrt(-2.0 * E);
}

double orbital_period(double E) {
  const double k = orbital_wavenumber(E);
  return 2.0 * std::numbers::pi / (k * k * k);
}

double orbit_geometry(const OrbitElements& el, double phi) {
  if (!el.bound()) throw std::domain_error("orbit_geometry: unbound elements");
  return el.L * el.L / (1.0 + el.eps * std::cos(phi));
}

double orbit_geometry(double R, double eps, double phi) {
  return (1.0 - eps * eps) * R / (2.0 * (1.0 + eps * std::cos(phi)));
}

double perihelion_radius(double R, double eps) { return 0.5 * R * (1.0 - eps); }
double aphelion_radius(double R, double eps) { return 0.5 * R * (1.0 + eps); }

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::newton: return "newton";
    case Formulation::s_form: return "s_form";
    case Formulation::pure_gc: return "pure_gc";
    case Formulation::mixed: return "mixed";
  }
  return "?";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "newton") return Formulation::newton;
  if (name == "s_form") return Formulation::s_form;
  if (name == "pure_gc") return Formulation::pure_gc;
  if (name == "mixed") return Formulation::mixed;
  throw std::invalid_argument("unknown formulation '" + std::string(name) +
                              "' (expected newton, s_form, pure_gc or mixed)");
}

FieldInput operator+(const FieldInput& a, const FieldInput& b) {
  return {a.e + b.e, a.a_low + b.a_low, a.c_high + b.c_high, a.a_high + b.a_high};
}

FieldInput operator*(double s, const FieldInput& a) {
  return {s * a.e, s * a.a_low, s * a.c_high, s * a.a_high};
}

namespace {

Vec3 s_form_shift(const FieldShifts& sh, double t) {
  return sh.delta_C + (t * sh.delta_A - sh.delta_A_moment);
}

}  // namespace

PhysicalPoint physical_point(const PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                             const PhysicalConstants& c) {
  const double b = c.beta;
  const double b2 = b * b;
  switch (s.form) {
    case Formulation::newton:
      return {s.x, s.y};
    case Formulation::s_form: {
      const Vec3 r = s.x + b2 * s.y + b * (in.c_high + s_form_shift(sh, s.t));
      const Vec3 v = s.y + b2 * coulomb_force(r) + b * (in.a_high + sh.delta_A);
      return {r, v};
    }
    case Formulation::pure_gc:
    case Formulation::mixed: {
      const Vec3 r = s.x + b * (in.c_high + sh.delta_C);
      const Vec3 a_low = s.form == Formulation::mixed ? in.a_low : Vec3{};
      const Vec3 qdot = s.y + b2 * coulomb_force(r) + b * (a_low + sh.delta_A);
      return {r, qdot + b * in.a_high};
    }
  }
  return {};
}

PhaseDerivative rhs_newton(const PhaseState& s, const Vec3& e_field, const PhysicalConstants& c) {
  const Vec3 f = coulomb_force(s.x);
  const Vec3 fdot = coulomb_force_rate(s.x, s.y);
  return {s.y, f + (c.beta * c.beta) * fdot - c.beta * e_field};
}

PhaseDerivative rhs_s_form(const PhaseState& s, const Vec3& c_field, const Vec3& /*a_field*/,
                           const FieldShifts& sh, const PhysicalConstants& c) {
  const Vec3 r = s.x + (c.beta * c.beta) * s.y + c.beta * (c_field + s_form_shift(sh, s.t));
  return {s.y, coulomb_force(r)};
}

PhaseDerivative rhs_mixed_gc(const PhaseState& s, const Vec3& a_low, const Vec3& c_high,
                             const FieldShifts& sh, const PhysicalConstants& c) {
  const Vec3 r = s.x + c.beta * (c_high + sh.delta_C);
  const Vec3 f = coulomb_force(r);
  return {s.y + (c.beta * c.beta) * f + c.beta * (a_low + sh.delta_A), f};
}

PhaseDerivative rhs_pure_gc(const PhaseState& s, const Vec3& c_field, const FieldShifts& sh,
                            const PhysicalConstants& c) {
  return rhs_mixed_gc(s, Vec3{}, c_field, sh, c);
}

PhaseDerivative rhs(const PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                    const PhysicalConstants& c) {
  switch (s.form) {
    case Formulation::newton: return rhs_newton(s, in.e, c);
    case Formulation::s_form: return rhs_s_form(s, in.c_high, in.a_high, sh, c);
    case Formulation::pure_gc: return rhs_pure_gc(s, in.c_high, sh, c);
    case Formulation::mixed: return rhs_mixed_gc(s, in.a_low, in.c_high, sh, c);
  }
  return {};
}

std::string_view to_string(InitialMapping m) {
  return m == InitialMapping::exact ? "exact" : "neglect_beta";
}

InitialMapping parse_initial_mapping(std::string_view name) {
  if (name == "exact") return InitialMapping::exact;
  if (name == "neglect_beta") return InitialMapping::neglect_beta;
  throw std::invalid_argument("unknown initial_mapping '" + std::string(name) +
                              "' (expected exact or neglect_beta)");
}

PhaseState initial_phase_state(Formulation form, const PhysicalPoint& start, double t0,
                               const FieldInput& in, const FieldShifts& sh,
                               const PhysicalConstants& c, InitialMapping mapping) {
  PhaseState s;
  s.form = form;
  s.t = t0;
  if (form == Formulation::newton || mapping == InitialMapping::neglect_beta) {
    s.x = start.r;
    s.y = start.v;
    return s;
  }
  const double b = c.beta;
  const double b2 = b * b;
  const Vec3 f = coulomb_force(start.r);
  if (form == Formulation::s_form) {
    s.y = start.v - b2 * f - b * (in.a_high + sh.delta_A);
    s.x = start.r - b2 * s.y - b * (in.c_high + s_form_shift(sh, t0));
  } else {
    const Vec3 a_low = form == Formulation::mixed ? in.a_low : Vec3{};
    s.x = start.r - b * (in.c_high + sh.delta_C);
    s.y = start.v - b2 * f - b * (a_low + sh.delta_A) - b * in.a_high;
  }
  return s;
}

void add_physical_velocity(PhaseState& s, const Vec3& dv, const PhysicalConstants& c) {
  s.y += dv;
  if (s.form == Formulation::s_form) s.x -= (c.beta * c.beta) * dv;
}

}  // namespace sedsim
