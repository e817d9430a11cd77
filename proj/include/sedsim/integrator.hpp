#pragma once

// Fixed-step RK4 trajectory driver: field refresh cadence and interpolation,
// moving or fixed cutoff windows, energy-floor pushes, ionisation detection,
// passage counting and exact checkpoint/resume.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sedsim/dynamics.hpp"
#include "sedsim/field.hpp"
#include "sedsim/interpolation.hpp"
#include "sedsim/rng.hpp"

namespace sedsim {

enum class CutoffPolicy { fixed, moving };
/// interpolated: nodes from the mode-sum kernel; exact: kernel at every stage
/// time; tabulated: nodes from a one-period FFT table (FieldTable).
enum class FieldSampling { interpolated, exact, tabulated };

struct IntegratorConfig {
  int steps_per_orbit = 4000;
  int field_refreshes_per_max_period = 10;
  int interpolation_order = 4;
  double energy_floor = -1.6;
  double ionisation_threshold = -0.05;
  double ionisation_dwell = 1.0e7;
  CutoffPolicy cutoff = CutoffPolicy::fixed;
  double n_harm = 2.5;
  double switch_increment = 0.2;
  FieldSampling sampling = FieldSampling::interpolated;
  double guard_radius = 1.0e-3;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// Classical RK4 on a vector space type Y (needs Y + Y and double * Y).
template <typename Y, typename F>
Y rk4_generic(const Y& y, double t, double dt, F&& f) {
  const Y k1 = f(t, y);
  const Y k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1);
  const Y k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2);
  const Y k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of the formulation in s.form; field_at(tau) supplies the
/// field at the stage times t, t + dt/2, t + dt. The field at t + dt is
/// written to *field_end when given. Throws std::invalid_argument for dt <= 0.
template <typename FieldAt>
PhaseState rk4_step(const PhaseState& s, double dt, FieldAt&& field_at, const FieldShifts& sh,
                    const PhysicalConstants& c, FieldInput* field_end = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  auto shifted = [&](const PhaseDerivative& d, double h) {
    return PhaseState{s.form, s.x + h * d.dx, s.y + h * d.dy, s.t + h};
  };
  const double half = 0.5 * dt;
  const FieldInput f0 = field_at(s.t);
  const FieldInput fm = field_at(s.t + half);
  const FieldInput f1 = field_at(s.t + dt);
  const PhaseDerivative k1 = rhs(s, f0, sh, c);
  const PhaseDerivative k2 = rhs(shifted(k1, half), fm, sh, c);
  const PhaseDerivative k3 = rhs(shifted(k2, half), fm, sh, c);
  const PhaseDerivative k4 = rhs(shifted(k3, dt), f1, sh, c);
  const double w = dt / 6.0;
  PhaseState out{s.form, s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
                 s.y + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy), s.t + dt};
  if (field_end) *field_end = f1;
  return out;
}

// --- records -----------------------------------------------------------------

enum SampleFlag : std::uint32_t {
  kFlagPush = 1u,
  kFlagSwitch = 2u,
  kFlagIonised = 4u,
  kFlagAbort = 8u,
};

struct Sample {
  double t = 0.0;
  double E = 0.0;
  double L = 0.0;
  double eps = 0.0;
  double r = 0.0;
  std::uint32_t flags = 0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class EventKind : std::uint32_t { push = 1, window_switch = 2, ionisation = 3, abort = 4 };

struct TrajectoryEvent {
  EventKind kind = EventKind::push;
  double t = 0.0;
  /// push: energy before/after. switch: |jump in r|, |jump in r'|.
  double value_a = 0.0;
  double value_b = 0.0;
  /// switch: old (low, high) -> new (low, high).
  std::uint64_t old_low = 0, old_high = 0, new_low = 0, new_high = 0;
  friend bool operator==(const TrajectoryEvent&, const TrajectoryEvent&) = default;
};

struct TrajectoryRecord {
  std::vector<Sample> samples;
  std::vector<TrajectoryEvent> events;
  std::optional<double> ionisation_time;
  bool aborted = false;
  std::string abort_message;
  std::uint64_t passages = 0;
  std::uint64_t steps = 0;
  double t_end = 0.0;
  double max_linear_shift = 0.0;  ///< max |delta_A t - delta_A_moment| seen
  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Earliest sample time t_i with E > threshold at every sample of the run
/// starting at t_i, the run containing a sample at or after t_i + dwell.
std::optional<double> detect_ionisation(std::span<const Sample> samples, double threshold,
                                        double dwell);
std::optional<double> detect_ionisation(const TrajectoryRecord& record,
                                        const IntegratorConfig& config);

/// Incremental form of detect_ionisation.
struct IonisationTracker {
  std::optional<double> run_start;
  std::optional<double> fired;
  /// Returns true when the sample completes a dwell.
  bool observe(double t, double E, double threshold, double dwell);
};

// --- energy floor ------------------------------------------------------------

struct PushResult {
  bool applied = false;
  double E_before = 0.0;
  double E_after = 0.0;
  Vec3 dv;
};

/// Rescales the physical speed so the energy equals config.energy_floor when it
/// is below it; the position is kept. A zero velocity is pushed along
/// rng.unit_vector().
PushResult apply_energy_floor(PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                              const PhysicalConstants& c, const IntegratorConfig& config,
                              CounterRng& rng);

// --- cutoff windows ------------------------------------------------------------

/// Window bounds for orbital frequency k^3: (0, round(n_h k^3 N)) or, for the
/// mixed formulation, (round(k^3 N), round((n_h + 1/2) k^3 N)); clamped into
/// [0, max_mode].
std::pair<std::size_t, std::size_t> moving_window_bounds(double k3, Formulation form,
                                                         const FrequencyGrid& grid, double n_harm);

/// Fixed-cutoff default: n_high = round(1.5 (3.2)^1.5 N) (1.5 harmonics at
/// E = -1.6); mixed n_low = round((2/3)^1.5 N).
std::pair<std::size_t, std::size_t> fixed_window_bounds(Formulation form, const FrequencyGrid& grid);

/// New bounds when |k^3 / k_ref^3 - 1| reaches the increment; none for
/// unbound energies.
std::optional<std::pair<std::size_t, std::size_t>> moving_cutoff_controller(
    double E, double k3_ref, Formulation form, const FrequencyGrid& grid,
    const IntegratorConfig& config);

// --- trajectory driver ----------------------------------------------------------

struct TrajectorySetup {
  PhysicalConstants constants;
  Formulation formulation = Formulation::s_form;
  IntegratorConfig integrator;
  InitialMapping mapping = InitialMapping::exact;
  ReductionPlan plan;
  bool field_on = true;
  double t_max = 0.0;
  std::uint64_t max_orbits = 0;  ///< 0: unlimited
  std::uint64_t sample_stride = 4000;
  PhysicalPoint start;
  double t0 = 0.0;
  std::uint64_t push_rng_key = 0;
};

/// Everything needed to continue a trajectory bit-exactly.
struct TrajectoryCheckpoint {
  PhaseState state;
  FieldWindow window;
  FieldInput field_now;
  double dt = 0.0;
  double anchor = 0.0;
  double k3_ref = 0.0;
  double swept_angle = 0.0;
  Vec3 last_r;
  std::uint64_t rng_counter = 0;
  std::uint32_t pending_flags = 0;
  std::optional<double> ion_run_start;
  TrajectoryRecord record;
};

class TrajectoryRunner {
 public:
  /// `field` may be null when setup.field_on is false.
  TrajectoryRunner(const TrajectorySetup& setup, std::shared_ptr<const FieldRealization> field,
                   const FieldWindow& initial_window);
  TrajectoryRunner(const TrajectorySetup& setup, std::shared_ptr<const FieldRealization> field,
                   const TrajectoryCheckpoint& checkpoint);

  bool finished() const;
  /// One RK4 step plus bookkeeping. Numerical failures end the run and are
  /// recorded, never thrown.
  void step();
  /// Steps until finished; calls on_checkpoint every `checkpoint_every` steps.
  void run(std::uint64_t checkpoint_every = 0,
           const std::function<void(const TrajectoryCheckpoint&)>& on_checkpoint = {});

  /// Switches the window at the current time (fixed or moving policy alike).
  void force_switch(std::size_t new_low, std::size_t new_high);

  const TrajectoryRecord& record() const { return ckpt_.record; }
  const PhaseState& state() const { return ckpt_.state; }
  const FieldWindow& window() const { return ckpt_.window; }
  double dt() const { return ckpt_.dt; }
  PhysicalPoint physical() const;
  OrbitElements elements() const;
  const TrajectoryCheckpoint& checkpoint() const { return ckpt_; }
  /// Field the dynamics sees at time t on the current stencil.
  FieldInput field_at(double t);
  FieldShifts shifts() const;
  /// Exact field refreshes made by this runner instance.
  std::uint64_t exact_evaluations() const { return interp_ ? interp_->exact_evaluations() : 0; }

 private:
  void init_sampling();
  void update_dt(double E);
  void record_sample(bool force);
  void perform_switch(std::size_t new_low, std::size_t new_high);
  void finish_abort(const std::string& message);
  void finish_end();

  TrajectorySetup setup_;
  std::shared_ptr<const FieldRealization> field_;
  std::optional<FieldInterpolant> interp_;
  TrajectoryCheckpoint ckpt_;
  bool done_ = false;
};

/// Runs a trajectory from setup.start under `window` to completion.
TrajectoryRecord run_trajectory(const TrajectorySetup& setup,
                                std::shared_ptr<const FieldRealization> field,
                                const FieldWindow& window);

}  // namespace sedsim
