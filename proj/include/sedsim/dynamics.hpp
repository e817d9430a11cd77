#pragma once

// Equations of motion in Bohr units (lengths a0, times tau0, energies Z^2 alpha^2 m c^2).
//
// Newton:      r'' = f + beta^2 (d/dt) f - beta E,   f = -r / r^3
// s-form:      s'' = f(r),  r = s + beta^2 s' + beta C
// pure GC:     p' = f(r),   q' = p + beta^2 f,            r = q + beta C
// mixed GC:    p' = f(r),   q' = p + beta^2 f + beta A_s, r = q + beta C_g
//
// A_s is A over the low band [1, n_low], C_g is C over the high band
// [n_low+1, n_high]; the pure grand-canonical and s-forms are n_low = 0.
// After window switches the effective fields carry the constant shifts
// delta_A, delta_C (and, for the s-form, the time-linear term
// delta_A t - delta_A_moment that keeps C_eff' = A_eff).

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sedsim/vec3.hpp"

namespace sedsim {

inline constexpr double kFineStructure = 7.2973525693e-3;
/// hbar / (alpha^2 m c^2) in seconds (Bohr time for Z = 1).
inline constexpr double kBohrTimeSeconds = 2.4188843265857e-17;

struct PhysicalConstants {
  int Z = 1;
  double alpha = kFineStructure;
  double beta = 0.0;  ///< sqrt(2/3) Z alpha^(3/2) unless overridden

  /// Throws std::invalid_argument for Z < 1 or alpha outside (0, 1).
  static PhysicalConstants from_charge(int Z, double alpha = kFineStructure);
  /// Same Z and alpha, explicit beta (beta = 0 gives the Kepler problem).
  PhysicalConstants with_beta(double b) const;

  double cutoff_scale() const { return double(Z) * Z * alpha * alpha; }
  /// tau0(Z) = tau0(1) / Z^2 in seconds.
  double bohr_time_seconds() const { return kBohrTimeSeconds / (double(Z) * Z); }
  /// 1 / beta^2.
  double damping_time() const;
};

/// Raised when the trajectory reaches the guard radius or a non-finite value.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws NumericalAbort for r = 0.
Vec3 coulomb_force(const Vec3& r);
/// (d/dt) f(r) along velocity v: -(v - 3 (v.rhat) rhat) / r^3.
Vec3 coulomb_force_rate(const Vec3& r, const Vec3& v);

struct OrbitElements {
  double E = 0.0;
  Vec3 L_vec;
  Vec3 eps_vec;
  double L = 0.0;
  double eps = 0.0;
  std::optional<double> R;      ///< -1/E, absent when unbound
  std::optional<double> kappa;  ///< L / sqrt(R/2), absent when unbound
  bool bound() const { return E < 0.0; }
};

/// E = p^2/2 - 1/r, L = r x p, eps = p^2 r - (p.r) p - rhat.
OrbitElements orbit_elements(const Vec3& r, const Vec3& p);

/// k = sqrt(-2E); the Kepler angular frequency is k^3. Throws for E >= 0.
double orbital_wavenumber(double E);
double orbital_period(double E);

/// r(phi) = L^2 / (1 + eps cos phi) for bound elements.
double orbit_geometry(const OrbitElements& el, double phi);
/// (1 - eps^2) R / (2 (1 + eps cos phi)).
double orbit_geometry(double R, double eps, double phi);
double perihelion_radius(double R, double eps);
double aphelion_radius(double R, double eps);

enum class Formulation { newton, s_form, pure_gc, mixed };

std::string_view to_string(Formulation f);
/// Throws std::invalid_argument for unknown names.
Formulation parse_formulation(std::string_view name);

/// Field values a formulation consumes at one instant.
struct FieldInput {
  Vec3 e;       ///< E over [1, n_high] (Newton)
  Vec3 a_low;   ///< A over [1, n_low]
  Vec3 c_high;  ///< C over [n_low+1, n_high]
  Vec3 a_high;  ///< A over [n_low+1, n_high] (= dC_high/dt)
};

FieldInput operator+(const FieldInput& a, const FieldInput& b);
FieldInput operator*(double s, const FieldInput& a);

/// Continuity shifts of the active window at time t.
struct FieldShifts {
  Vec3 delta_A;
  Vec3 delta_C;
  Vec3 delta_A_moment;
};

/// Primary variables (x, y):
///   newton (r, r'),  s_form (s, s'),  pure_gc / mixed (q, p).
struct PhaseState {
  Formulation form = Formulation::s_form;
  Vec3 x;
  Vec3 y;
  double t = 0.0;
};

struct PhaseDerivative {
  Vec3 dx;
  Vec3 dy;
};

struct PhysicalPoint {
  Vec3 r;
  Vec3 v;
};

/// Physical position and velocity reconstructed from the primary variables.
PhysicalPoint physical_point(const PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                             const PhysicalConstants& c);

PhaseDerivative rhs_newton(const PhaseState& s, const Vec3& e_field, const PhysicalConstants& c);
PhaseDerivative rhs_s_form(const PhaseState& s, const Vec3& c_field, const Vec3& a_field,
                           const FieldShifts& sh, const PhysicalConstants& c);
PhaseDerivative rhs_mixed_gc(const PhaseState& s, const Vec3& a_low, const Vec3& c_high,
                             const FieldShifts& sh, const PhysicalConstants& c);
PhaseDerivative rhs_pure_gc(const PhaseState& s, const Vec3& c_field, const FieldShifts& sh,
                            const PhysicalConstants& c);

/// Dispatches on s.form.
PhaseDerivative rhs(const PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                    const PhysicalConstants& c);

enum class InitialMapping {
  exact,         ///< primary variables chosen so (r, r') are reproduced exactly
  neglect_beta,  ///< q = r, p = r' (s = r, s' = r')
};

std::string_view to_string(InitialMapping m);
InitialMapping parse_initial_mapping(std::string_view name);

PhaseState initial_phase_state(Formulation form, const PhysicalPoint& start, double t0,
                               const FieldInput& in, const FieldShifts& sh,
                               const PhysicalConstants& c, InitialMapping mapping);

/// Adds dv to the physical velocity while keeping the physical position.
void add_physical_velocity(PhaseState& s, const Vec3& dv, const PhysicalConstants& c);

}  // namespace sedsim
