#include "sedsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sedsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPassageTolerance = 1e-9;

[[noreturn]] void config_error(const std::string& what) { throw std::invalid_argument(what); }

std::size_t round_mode(double x) { return x <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(x)); }

std::pair<std::size_t, std::size_t> clamp_bounds(std::size_t lo, std::size_t hi,
                                                 const FrequencyGrid& grid) {
  hi = std::clamp<std::size_t>(hi, 1, grid.max_mode);
  lo = std::min(lo, hi - 1);
  return {lo, hi};
}

}  // namespace

void IntegratorConfig::validate() const {
  if (steps_per_orbit < 600) config_error("steps_per_orbit must be >= 600");
  if (field_refreshes_per_max_period < 5) {
    config_error("field_refreshes_per_max_period must be >= 5");
  }
  if (interpolation_order != 4) config_error("interpolation_order must be 4");
  if (!(energy_floor < ionisation_threshold)) {
    config_error("energy_floor must be below ionisation_threshold");
  }
  if (!(ionisation_threshold < 0.0)) config_error("ionisation_threshold must be negative");
  if (!(ionisation_dwell > 0.0)) config_error("ionisation_dwell must be positive");
  if (!(n_harm > 0.0)) config_error("n_harm must be positive");
  if (!(switch_increment > 0.0 && switch_increment < 1.0)) {
    config_error("switch_increment must lie in (0, 1)");
  }
  if (!(guard_radius > 0.0)) config_error("guard_radius must be positive");
}

// --- ionisation ----------------------------------------------------------------

bool IonisationTracker::observe(double t, double E, double threshold, double dwell) {
  if (fired) return false;
  if (E > threshold) {
    if (!run_start) run_start = t;
    if (t - *run_start >= dwell) {
      fired = run_start;
      return true;
    }
  } else {
    run_start.reset();
  }
  return false;
}

std::optional<double> detect_ionisation(std::span<const Sample> samples, double threshold,
                                        double dwell) {
  IonisationTracker tracker;
  for (const Sample& s : samples) {
    if (tracker.observe(s.t, s.E, threshold, dwell)) break;
  }
  return tracker.fired;
}

std::optional<double> detect_ionisation(const TrajectoryRecord& record,
                                        const IntegratorConfig& config) {
  return detect_ionisation(record.samples, config.ionisation_threshold, config.ionisation_dwell);
}

// --- energy floor ----------------------------------------------------------------

PushResult apply_energy_floor(PhaseState& s, const FieldInput& in, const FieldShifts& sh,
                              const PhysicalConstants& c, const IntegratorConfig& config,
                              CounterRng& rng) {
  PushResult res;
  const PhysicalPoint pt = physical_point(s, in, sh, c);
  const double rn = norm(pt.r);
  res.E_before = 0.5 * norm2(pt.v) - 1.0 / rn;
  res.E_after = res.E_before;
  if (!(res.E_before < config.energy_floor)) return res;

  const double speed = std::sqrt(2.0 * (config.energy_floor + 1.0 / rn));
  const double v = norm(pt.v);
  res.dv = v > 0.0 ? pt.v * (speed / v) - pt.v : speed * rng.unit_vector();
  add_physical_velocity(s, res.dv, c);
  const PhysicalPoint after = physical_point(s, in, sh, c);
  res.E_after = 0.5 * norm2(after.v) - 1.0 / norm(after.r);
  res.applied = true;
  return res;
}

// --- windows -------------------------------------------------------------------

std::pair<std::size_t, std::size_t> moving_window_bounds(double k3, Formulation form,
                                                         const FrequencyGrid& grid, double n_harm) {
  const double n = static_cast<double>(grid.mesh_density);
  if (form == Formulation::mixed) {
    return clamp_bounds(round_mode(k3 * n), round_mode((n_harm + 0.5) * k3 * n), grid);
  }
  return clamp_bounds(0, round_mode(n_harm * k3 * n), grid);
}

std::pair<std::size_t, std::size_t> fixed_window_bounds(Formulation form,
                                                        const FrequencyGrid& grid) {
  const double n = static_cast<double>(grid.mesh_density);
  const std::size_t hi = round_mode(1.5 * std::pow(3.2, 1.5) * n);
  const std::size_t lo = form == Formulation::mixed ? round_mode(std::pow(2.0 / 3.0, 1.5) * n) : 0;
  return {lo, hi};
}

std::optional<std::pair<std::size_t, std::size_t>> moving_cutoff_controller(
    double E, double k3_ref, Formulation form, const FrequencyGrid& grid,
    const IntegratorConfig& config) {
  if (!(E < 0.0)) return std::nullopt;
  const double k = orbital_wavenumber(E);
  const double k3 = k * k * k;
  if (k3_ref > 0.0 && std::abs(k3 / k3_ref - 1.0) < config.switch_increment - 1e-12) {
    return std::nullopt;
  }
  return moving_window_bounds(k3, form, grid, config.n_harm);
}

// --- runner ---------------------------------------------------------------------

TrajectoryRunner::TrajectoryRunner(const TrajectorySetup& setup,
                                   std::shared_ptr<const FieldRealization> field,
                                   const FieldWindow& initial_window)
    : setup_(setup), field_(std::move(field)) {
  setup_.integrator.validate();
  if (!(setup_.t_max > setup_.t0)) config_error("t_max must exceed the start time");
  if (setup_.sample_stride == 0) config_error("sample_stride must be >= 1");
  if (setup_.field_on && !field_) config_error("field is on but no realization was given");
  ckpt_.window = initial_window;
  if (field_) ckpt_.window.validate(field_->grid());
  ckpt_.anchor = setup_.t0;
  init_sampling();

  FieldShifts sh = shifts();
  if (interp_) interp_->select(setup_.t0);
  ckpt_.field_now = field_at(setup_.t0);
  ckpt_.state = initial_phase_state(setup_.formulation, setup_.start, setup_.t0, ckpt_.field_now, sh,
                                    setup_.constants, setup_.mapping);
  ckpt_.last_r = setup_.start.r;
  const OrbitElements el = orbit_elements(setup_.start.r, setup_.start.v);
  if (el.bound()) {
    const double k = orbital_wavenumber(el.E);
    ckpt_.k3_ref = k * k * k;
  }
  update_dt(el.E);
  record_sample(true);
}

TrajectoryRunner::TrajectoryRunner(const TrajectorySetup& setup,
                                   std::shared_ptr<const FieldRealization> field,
                                   const TrajectoryCheckpoint& checkpoint)
    : setup_(setup), field_(std::move(field)), ckpt_(checkpoint) {
  setup_.integrator.validate();
  if (setup_.field_on && !field_) config_error("field is on but no realization was given");
  if (field_) ckpt_.window.validate(field_->grid());
  init_sampling();
}

void TrajectoryRunner::init_sampling() {
  interp_.reset();
  if (!setup_.field_on || setup_.constants.beta == 0.0) return;
  if (setup_.integrator.sampling == FieldSampling::interpolated) {
    const double h = refresh_spacing(field_->grid(), ckpt_.window,
                                     setup_.integrator.field_refreshes_per_max_period);
    interp_.emplace(*field_, ckpt_.window, setup_.formulation, ckpt_.anchor, h, setup_.plan);
  } else if (setup_.integrator.sampling == FieldSampling::tabulated) {
    interp_.emplace(std::make_shared<const FieldTable>(
        *field_, ckpt_.window, setup_.formulation,
        FieldTable::table_size(ckpt_.window, setup_.integrator.field_refreshes_per_max_period)));
  }
}

FieldShifts TrajectoryRunner::shifts() const {
  return {ckpt_.window.delta_A, ckpt_.window.delta_C, ckpt_.window.delta_A_moment};
}

FieldInput TrajectoryRunner::field_at(double t) {
  if (!setup_.field_on || setup_.constants.beta == 0.0) return {};
  if (interp_) return interp_->value(t);
  return sample_fields(*field_, ckpt_.window, setup_.formulation, t, setup_.plan);
}

PhysicalPoint TrajectoryRunner::physical() const {
  return physical_point(ckpt_.state, ckpt_.field_now, shifts(), setup_.constants);
}

OrbitElements TrajectoryRunner::elements() const {
  const PhysicalPoint p = physical();
  return orbit_elements(p.r, p.v);
}

void TrajectoryRunner::update_dt(double E) {
  const double e_eff = std::min(E, setup_.integrator.ionisation_threshold);
  double dt = orbital_period(e_eff) / setup_.integrator.steps_per_orbit;
  if (interp_) dt = std::min(dt, interp_->spacing());
  ckpt_.dt = dt;
}

bool TrajectoryRunner::finished() const {
  const TrajectoryRecord& rec = ckpt_.record;
  if (done_ || rec.aborted || rec.ionisation_time) return true;
  if (setup_.max_orbits > 0 && rec.passages >= setup_.max_orbits) return true;
  return ckpt_.state.t >= setup_.t_max;
}

void TrajectoryRunner::record_sample(bool force) {
  TrajectoryRecord& rec = ckpt_.record;
  const double t = ckpt_.state.t;
  if (!rec.samples.empty() && rec.samples.back().t == t) {
    rec.samples.back().flags |= ckpt_.pending_flags;
    ckpt_.pending_flags = 0;
    return;
  }
  if (!force && rec.steps % setup_.sample_stride != 0) return;
  const PhysicalPoint p = physical();
  const OrbitElements el = orbit_elements(p.r, p.v);
  rec.samples.push_back({t, el.E, el.L, el.eps, norm(p.r), ckpt_.pending_flags});
  ckpt_.pending_flags = 0;

  IonisationTracker tracker{ckpt_.ion_run_start, std::nullopt};
  const bool fired = tracker.observe(t, el.E, setup_.integrator.ionisation_threshold,
                                     setup_.integrator.ionisation_dwell);
  ckpt_.ion_run_start = tracker.run_start;
  if (fired) {
    rec.ionisation_time = tracker.fired;
    rec.samples.back().flags |= kFlagIonised;
    rec.events.push_back({EventKind::ionisation, *tracker.fired, el.E, t, 0, 0, 0, 0});
  }
}

void TrajectoryRunner::finish_abort(const std::string& message) {
  TrajectoryRecord& rec = ckpt_.record;
  rec.aborted = true;
  rec.abort_message = message;
  rec.events.push_back({EventKind::abort, ckpt_.state.t, 0, 0, 0, 0, 0, 0});
  rec.t_end = ckpt_.state.t;
  done_ = true;
}

void TrajectoryRunner::finish_end() {
  record_sample(true);
  ckpt_.record.t_end = ckpt_.state.t;
  done_ = true;
}

void TrajectoryRunner::force_switch(std::size_t new_low, std::size_t new_high) {
  if (!field_) throw std::logic_error("force_switch: trajectory has no field");
  perform_switch(new_low, new_high);
}

void TrajectoryRunner::perform_switch(std::size_t new_low, std::size_t new_high) {
  const double t = ckpt_.state.t;
  const FieldWindow old = ckpt_.window;
  const PhysicalPoint before = physical();

  FieldWindow probe = old;
  probe.n_low = new_low;
  probe.n_high = new_high;
  probe.validate(field_->grid());
  const bool sampled = setup_.field_on && setup_.constants.beta != 0.0;
  const bool tabulated = sampled && setup_.integrator.sampling == FieldSampling::tabulated;
  std::optional<FieldInterpolant> next_interp;
  FieldInput fresh;
  if (tabulated) {
    // The dynamics continues on the new table's interpolant, so it supplies
    // the new-window side of the continuity conditions.
    next_interp.emplace(std::make_shared<const FieldTable>(
        *field_, probe, setup_.formulation,
        FieldTable::table_size(probe, setup_.integrator.field_refreshes_per_max_period)));
    next_interp->select(t);
    fresh = next_interp->value(t);
  } else if (sampled) {
    fresh = sample_fields(*field_, probe, setup_.formulation, t, setup_.plan);
  }
  if (setup_.formulation == Formulation::newton || !sampled) {
    ckpt_.window = switch_window(old, *field_, t, new_low, new_high, setup_.plan);
  } else {
    const BandValues seen{ckpt_.field_now.a_low, ckpt_.field_now.c_high, ckpt_.field_now.a_high};
    const BandValues next{fresh.a_low, fresh.c_high, fresh.a_high};
    ckpt_.window = switch_window_with(old, field_->grid(), seen, next, t, new_low, new_high);
  }
  ckpt_.field_now = fresh;
  ckpt_.anchor = t;
  if (tabulated) {
    interp_ = std::move(next_interp);
  } else if (interp_) {
    const double h = refresh_spacing(field_->grid(), ckpt_.window,
                                     setup_.integrator.field_refreshes_per_max_period);
    interp_.emplace(*field_, ckpt_.window, setup_.formulation, t, h, setup_.plan);
  }
  const PhysicalPoint after = physical();
  update_dt(orbit_elements(after.r, after.v).E);

  ckpt_.record.events.push_back({EventKind::window_switch, t, norm(after.r - before.r),
                                 norm(after.v - before.v), old.n_low, old.n_high, new_low,
                                 new_high});
  ckpt_.pending_flags |= kFlagSwitch;
}

void TrajectoryRunner::step() {
  if (finished()) return;
  TrajectoryRecord& rec = ckpt_.record;
  const PhysicalConstants& c = setup_.constants;
  const IntegratorConfig& cfg = setup_.integrator;

  double dt = ckpt_.dt;
  const double remaining = setup_.t_max - ckpt_.state.t;
  if (dt > remaining) dt = remaining;

  PhysicalPoint p;
  try {
    if (interp_) interp_->select(ckpt_.state.t + 0.5 * dt);
    FieldInput f_end;
    const PhaseState next = rk4_step(
        ckpt_.state, dt, [this](double tau) { return field_at(tau); }, shifts(), c, &f_end);
    if (!is_finite(next.x) || !is_finite(next.y)) throw NumericalAbort("non-finite state");
    ckpt_.state = next;
    ckpt_.field_now = f_end;
    p = physical();
    if (!is_finite(p.r) || !is_finite(p.v)) throw NumericalAbort("non-finite physical state");
    if (norm(p.r) < cfg.guard_radius) {
      throw NumericalAbort("guard radius reached at t = " + std::to_string(ckpt_.state.t));
    }
  } catch (const NumericalAbort& e) {
    ++rec.steps;
    finish_abort(e.what());
    return;
  }
  ++rec.steps;

  // Swept polar angle since the previous step.
  const Vec3 cr = cross(ckpt_.last_r, p.r);
  ckpt_.swept_angle += std::atan2(norm(cr), dot(ckpt_.last_r, p.r));
  ckpt_.last_r = p.r;

  CounterRng rng(setup_.push_rng_key, ckpt_.rng_counter);
  const PushResult push = apply_energy_floor(ckpt_.state, ckpt_.field_now, shifts(), c, cfg, rng);
  ckpt_.rng_counter = rng.counter();
  if (push.applied) {
    rec.events.push_back({EventKind::push, ckpt_.state.t, push.E_before, push.E_after, 0, 0, 0, 0});
    ckpt_.pending_flags |= kFlagPush;
  }

  bool passage = false;
  while (ckpt_.swept_angle >= kTwoPi - kPassageTolerance) {
    ckpt_.swept_angle -= kTwoPi;
    ++rec.passages;
    passage = true;
  }
  if (passage) {
    const double E = elements().E;
    update_dt(E);
    if (cfg.cutoff == CutoffPolicy::moving && field_ && E < 0.0) {
      if (auto bounds = moving_cutoff_controller(E, ckpt_.k3_ref, setup_.formulation,
                                                 field_->grid(), cfg)) {
        const double k = orbital_wavenumber(E);
        ckpt_.k3_ref = k * k * k;
        if (bounds->first != ckpt_.window.n_low || bounds->second != ckpt_.window.n_high) {
          perform_switch(bounds->first, bounds->second);
        }
      }
    }
  }

  if (setup_.formulation == Formulation::s_form) {
    rec.max_linear_shift =
        std::max(rec.max_linear_shift, ckpt_.window.linear_shift_magnitude(ckpt_.state.t));
  }

  record_sample(ckpt_.pending_flags != 0);
  if (rec.ionisation_time) {
    rec.t_end = ckpt_.state.t;
    done_ = true;
    return;
  }
  if (finished()) finish_end();
}

void TrajectoryRunner::run(std::uint64_t checkpoint_every,
                           const std::function<void(const TrajectoryCheckpoint&)>& on_checkpoint) {
  while (!finished()) {
    step();
    if (checkpoint_every > 0 && on_checkpoint && !done_ &&
        ckpt_.record.steps % checkpoint_every == 0) {
      on_checkpoint(ckpt_);
    }
  }
  if (!done_) finish_end();
}

TrajectoryRecord run_trajectory(const TrajectorySetup& setup,
                                std::shared_ptr<const FieldRealization> field,
                                const FieldWindow& window) {
  TrajectoryRunner runner(setup, std::move(field), window);
  runner.run();
  return runner.record();
}

}  // namespace sedsim
