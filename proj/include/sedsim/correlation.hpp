#pragma once

// Closed-form two-point functions of the discretised field. Written with real
// arithmetic only so that they instantiate for multiprecision types.
//
//   C_EE(t) = (1 / 8 pi N^4) Re (3 + 2 sinh^2 x) / sinh^4 x
//   C_AA(t) = (1 / 4 pi N^2) Re 1 / sinh^2 x,          x = (s + i t) / 2N
//
// These are the exact lattice sums sum_n a_n^2 cos(omega_n t) of the mode
// amplitudes (sum n^3 q^n = q (1 + 4q + q^2) / (1 - q)^4). As N -> infinity
// they tend to (6/pi) Re 1/(t - i s)^4 and (1/pi) Re 1/(s + i t)^2.

#include <cmath>
#include <numbers>

namespace sedsim {

namespace detail {

template <typename Real>
struct Cx {
  Real re;
  Real im;
};

template <typename Real>
Cx<Real> mul(const Cx<Real>& a, const Cx<Real>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <typename Real>
Cx<Real> div(const Cx<Real>& a, const Cx<Real>& b) {
  const Real d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

/// sinh(a + i b)
template <typename Real>
Cx<Real> csinh(const Real& a, const Real& b) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  return {sinh(a) * cos(b), cosh(a) * sin(b)};
}

template <typename Real>
Real pi_v() {
  return Real(std::numbers::pi_v<long double>);
}

}  // namespace detail

template <typename Real>
Real correlation_EE_theory(Real t, Real mesh_density, Real cutoff_scale) {
  const Real two_n = Real(2) * mesh_density;
  const detail::Cx<Real> sh = detail::csinh<Real>(cutoff_scale / two_n, t / two_n);
  const detail::Cx<Real> sh2 = detail::mul(sh, sh);
  const detail::Cx<Real> sh4 = detail::mul(sh2, sh2);
  const detail::Cx<Real> num{Real(3) + Real(2) * sh2.re, Real(2) * sh2.im};
  const detail::Cx<Real> q = detail::div(num, sh4);
  const Real n2 = mesh_density * mesh_density;
  return q.re / (Real(8) * detail::pi_v<Real>() * n2 * n2);
}

template <typename Real>
Real correlation_EE_limit(Real t, Real cutoff_scale) {
  const detail::Cx<Real> z{t, -cutoff_scale};
  const detail::Cx<Real> z2 = detail::mul(z, z);
  const detail::Cx<Real> z4 = detail::mul(z2, z2);
  const detail::Cx<Real> q = detail::div(detail::Cx<Real>{Real(1), Real(0)}, z4);
  return Real(6) / detail::pi_v<Real>() * q.re;
}

template <typename Real>
Real correlation_AA_theory(Real t, Real mesh_density, Real cutoff_scale) {
  const Real two_n = Real(2) * mesh_density;
  const detail::Cx<Real> sh = detail::csinh<Real>(cutoff_scale / two_n, t / two_n);
  const detail::Cx<Real> sh2 = detail::mul(sh, sh);
  const detail::Cx<Real> q = detail::div(detail::Cx<Real>{Real(1), Real(0)}, sh2);
  return q.re / (Real(4) * detail::pi_v<Real>() * mesh_density * mesh_density);
}

template <typename Real>
Real correlation_AA_limit(Real t, Real cutoff_scale) {
  const detail::Cx<Real> z{cutoff_scale, t};
  const detail::Cx<Real> q = detail::div(detail::Cx<Real>{Real(1), Real(0)}, detail::mul(z, z));
  return q.re / detail::pi_v<Real>();
}

inline double correlation_EE_theory(double t, double mesh_density, double cutoff_scale) {
  return correlation_EE_theory<double>(t, mesh_density, cutoff_scale);
}
inline double correlation_EE_limit(double t, double cutoff_scale) {
  return correlation_EE_limit<double>(t, cutoff_scale);
}
inline double correlation_AA_theory(double t, double mesh_density, double cutoff_scale) {
  return correlation_AA_theory<double>(t, mesh_density, cutoff_scale);
}
inline double correlation_AA_limit(double t, double cutoff_scale) {
  return correlation_AA_limit<double>(t, cutoff_scale);
}

}  // namespace sedsim
