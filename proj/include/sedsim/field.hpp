#pragma once

// One-dimensional spectral representation of the zero-point field in the
// dipole approximation, Bohr units. With omega_n = n/N, d_omega = 1/N and
// cutoff factor g_n = exp(-s omega_n / 2), s = Z^2 alpha^2:
//
//   E(t) = sum_n sqrt(d_omega omega_n^3 / pi) g_n (-A_n cos omega_n t + B_n sin omega_n t)
//   A(t) = sum_n sqrt(d_omega omega_n   / pi) g_n ( A_n sin omega_n t + B_n cos omega_n t)
//   C(t) = sum_n sqrt(d_omega / (pi omega_n)) g_n (-A_n cos omega_n t + B_n sin omega_n t)
//
// so that A = dC/dt and E = -dA/dt hold term by term. Modes start at n = 1.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sedsim/correlation.hpp"
#include "sedsim/reduction.hpp"
#include "sedsim/vec3.hpp"

namespace sedsim {

struct FrequencyGrid {
  std::int64_t mesh_density = 1;  ///< N; omega_n = n / N
  std::size_t max_mode = 1;       ///< largest retained n

  double omega(std::size_t n) const {
    return static_cast<double>(n) / static_cast<double>(mesh_density);
  }
  double delta_omega() const { return 1.0 / static_cast<double>(mesh_density); }
  double omega_max() const { return omega(max_mode); }
  void validate() const;
};

/// Inclusive mode range [first, last]; empty when last < first.
struct ModeRange {
  std::size_t first = 1;
  std::size_t last = 0;

  bool empty() const { return last < first; }
  std::size_t size() const { return empty() ? 0 : last - first + 1; }
  friend bool operator==(const ModeRange&, const ModeRange&) = default;
};

/// Frozen random spectral coefficients and amplitudes of one field sample
/// path. Immutable after construction; safe to share between threads.
class FieldRealization {
 public:
  /// Draws A_n, B_n ~ N(0,1) for every mode and component from the counter
  /// stream keyed by `seed`. Throws std::invalid_argument for N <= 0 or
  /// max_mode == 0.
  static FieldRealization build(std::uint64_t seed, const FrequencyGrid& grid, double cutoff_scale);

  /// Explicit coefficients (index 0 holds mode 1).
  static FieldRealization from_coefficients(const FrequencyGrid& grid, double cutoff_scale,
                                            std::span<const Vec3> coeff_a,
                                            std::span<const Vec3> coeff_b);

  const FrequencyGrid& grid() const { return grid_; }
  double cutoff_scale() const { return cutoff_scale_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t mode_count() const { return grid_.max_mode; }
  ModeRange all_modes() const { return {1, grid_.max_mode}; }

  // Storage is structure-of-arrays, entry n-1 for mode n.
  std::span<const double> amplitude_e() const { return amp_e_; }
  std::span<const double> amplitude_a() const { return amp_a_; }
  std::span<const double> amplitude_c() const { return amp_c_; }
  std::span<const double> coeff_a(int component) const { return coeff_a_[component]; }
  std::span<const double> coeff_b(int component) const { return coeff_b_[component]; }
  Vec3 coeff_a_at(std::size_t n) const;
  Vec3 coeff_b_at(std::size_t n) const;

 private:
  FieldRealization(const FrequencyGrid& grid, double cutoff_scale, std::uint64_t seed);
  void compute_amplitudes();

  FrequencyGrid grid_;
  double cutoff_scale_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> amp_e_, amp_a_, amp_c_;
  std::vector<double> coeff_a_[3];
  std::vector<double> coeff_b_[3];
};

enum FieldKind : unsigned {
  kFieldE = 1u,
  kFieldA = 2u,
  kFieldC = 4u,
};

struct FieldSums {
  Vec3 e;
  Vec3 a;
  Vec3 c;
};

/// Parallel chunked kernel. Only kinds in `kinds` are computed; the others are
/// left zero. Throws std::out_of_range if the range leaves [1, max_mode]
/// (a range starting at 0 is rejected when C is requested, accepted otherwise).
FieldSums evaluate_fields(const FieldRealization& field, ModeRange range, double t,
                          unsigned kinds, const ReductionPlan& plan = {});

/// Serial reference: direct cos/sin per mode, compensated long double sum.
FieldSums evaluate_fields_serial(const FieldRealization& field, ModeRange range, double t,
                                 unsigned kinds);

Vec3 eval_E(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan = {});
Vec3 eval_A(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan = {});
Vec3 eval_C(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan = {});

/// Per-mode terms of one field kind at time t (for audits and dumps).
std::vector<Vec3> field_terms(const FieldRealization& field, ModeRange range, double t,
                              FieldKind kind);

/// Record of one window change.
struct WindowSwitch {
  double t = 0.0;
  std::size_t old_low = 0, old_high = 0;
  std::size_t new_low = 0, new_high = 0;
  Vec3 mismatch_a;  ///< increment added to delta_A
  Vec3 mismatch_c;  ///< increment added to delta_C
};

/// Active split of the spectrum plus the continuity shifts accumulated over
/// window changes. The A band is [1, n_low] and the C band [n_low+1, n_high];
/// n_low = 0 puts the whole window in C.
struct FieldWindow {
  std::size_t n_low = 0;
  std::size_t n_high = 1;
  Vec3 delta_A;
  Vec3 delta_C;
  /// sum over switches of t' * (delta_A increment); the s-form needs the
  /// time-linear shift delta_A * t - delta_A_moment.
  Vec3 delta_A_moment;
  std::vector<WindowSwitch> switch_log;

  ModeRange a_band() const { return {1, n_low}; }
  ModeRange c_band() const { return {n_low + 1, n_high}; }
  ModeRange full_band() const { return {1, n_high}; }

  double last_switch_time() const;
  /// |delta_A t - delta_A_moment|: size of the time-linear position shift.
  double linear_shift_magnitude(double t) const;
  /// Throws std::out_of_range unless 0 <= n_low < n_high <= max_mode.
  void validate(const FrequencyGrid& grid) const;
};

FieldWindow make_window(const FrequencyGrid& grid, std::size_t n_low, std::size_t n_high);

/// Field values entering the continuity conditions at one instant.
struct BandValues {
  Vec3 a_low;   ///< A over the A band
  Vec3 c_high;  ///< C over the C band
  Vec3 a_high;  ///< dC/dt over the C band
};

BandValues band_values(const FieldRealization& field, const FieldWindow& window, double t,
                       const ReductionPlan& plan = {});

/// Moves the window to [new_low, new_high] at t_switch and adds the new
/// shifts to the previous ones:
///   delta_A += A(t') - A'(t') + dC/dt(t') - dC'/dt(t'),   delta_C += C(t') - C'(t').
FieldWindow switch_window(const FieldWindow& window, const FieldRealization& field, double t_switch,
                          std::size_t new_low, std::size_t new_high, const ReductionPlan& plan = {});

/// Same bookkeeping with caller-supplied field values on both sides (used when
/// the dynamics saw interpolated old-window values).
FieldWindow switch_window_with(const FieldWindow& window, const FrequencyGrid& grid,
                               const BandValues& old_values, const BandValues& new_values,
                               double t_switch, std::size_t new_low, std::size_t new_high);

/// Delimited spectrum dump, one row per mode:
/// n,omega,amp_E,amp_A,amp_C,A_x,A_y,A_z,B_x,B_y,B_z
void write_spectrum(std::ostream& out, const FieldRealization& field);

}  // namespace sedsim
