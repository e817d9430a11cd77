#include "sedsim/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sedsim/rng.hpp"

namespace sedsim {

void FrequencyGrid::validate() const {
  if (mesh_density <= 0) throw std::invalid_argument("FrequencyGrid: mesh density N must be positive");
  if (max_mode == 0) throw std::invalid_argument("FrequencyGrid: max_mode must be at least 1");
}

FieldRealization::FieldRealization(const FrequencyGrid& grid, double cutoff_scale, std::uint64_t seed)
    : grid_(grid), cutoff_scale_(cutoff_scale), seed_(seed) {
  grid_.validate();
  if (!(cutoff_scale >= 0.0) || !std::isfinite(cutoff_scale)) {
    throw std::invalid_argument("FieldRealization: cutoff_scale must be finite and >= 0");
  }
  const std::size_t m = grid_.max_mode;
  for (int c = 0; c < 3; ++c) {
    coeff_a_[c].resize(m);
    coeff_b_[c].resize(m);
  }
}

void FieldRealization::compute_amplitudes() {
  const std::size_t m = grid_.max_mode;
  amp_e_.resize(m);
  amp_a_.resize(m);
  amp_c_.resize(m);
  const double dw = grid_.delta_omega();
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = grid_.omega(i + 1);
    const double g = std::exp(-0.5 * cutoff_scale_ * w);
    amp_e_[i] = std::sqrt(dw * w * w * w / pi) * g;
    amp_a_[i] = std::sqrt(dw * w / pi) * g;
    amp_c_[i] = std::sqrt(dw / (pi * w)) * g;
  }
}

FieldRealization FieldRealization::build(std::uint64_t seed, const FrequencyGrid& grid,
                                         double cutoff_scale) {
  FieldRealization f(grid, cutoff_scale, seed);
  const std::size_t m = grid.max_mode;
  // Pair index 3*(n-1) + c gives (A_n^c, B_n^c).
#pragma omp parallel for schedule(static) if (m > 65536)
  for (std::size_t i = 0; i < m; ++i) {
    for (int c = 0; c < 3; ++c) {
      double a = 0.0;
      double b = 0.0;
      CounterRng::normal_pair_at(seed, 3 * i + static_cast<std::size_t>(c), a, b);
      f.coeff_a_[c][i] = a;
      f.coeff_b_[c][i] = b;
    }
  }
  f.compute_amplitudes();
  return f;
}

FieldRealization FieldRealization::from_coefficients(const FrequencyGrid& grid, double cutoff_scale,
                                                     std::span<const Vec3> coeff_a,
                                                     std::span<const Vec3> coeff_b) {
  FieldRealization f(grid, cutoff_scale, 0);
  if (coeff_a.size() != grid.max_mode || coeff_b.size() != grid.max_mode) {
    throw std::invalid_argument("FieldRealization: coefficient count must equal max_mode");
  }
  for (std::size_t i = 0; i < grid.max_mode; ++i) {
    for (int c = 0; c < 3; ++c) {
      f.coeff_a_[c][i] = coeff_a[i][c];
      f.coeff_b_[c][i] = coeff_b[i][c];
    }
  }
  f.compute_amplitudes();
  return f;
}

Vec3 FieldRealization::coeff_a_at(std::size_t n) const {
  return {coeff_a_[0].at(n - 1), coeff_a_[1].at(n - 1), coeff_a_[2].at(n - 1)};
}

Vec3 FieldRealization::coeff_b_at(std::size_t n) const {
  return {coeff_b_[0].at(n - 1), coeff_b_[1].at(n - 1), coeff_b_[2].at(n - 1)};
}

namespace {

void check_range(const FieldRealization& field, ModeRange& range, unsigned kinds) {
  if (range.empty()) return;
  if (range.last > field.mode_count()) {
    throw std::out_of_range("mode range [" + std::to_string(range.first) + ", " +
                            std::to_string(range.last) + "] exceeds max_mode " +
                            std::to_string(field.mode_count()));
  }
  if (range.first == 0) {
    if (kinds & kFieldC) throw std::out_of_range("C field is undefined at mode 0");
    range.first = 1;  // zero-amplitude term for E and A
  }
}

// Lanes: 3 per requested kind, in E, A, C order.
template <unsigned Kinds>
constexpr std::size_t lane_count() {
  return 3 * static_cast<std::size_t>(std::popcount(Kinds));
}

template <unsigned Kinds>
FieldSums evaluate_kernel(const FieldRealization& field, ModeRange range, double t,
                          const ReductionPlan& plan) {
  constexpr std::size_t W = lane_count<Kinds>();
  constexpr bool kE = (Kinds & kFieldE) != 0;
  constexpr bool kA = (Kinds & kFieldA) != 0;
  constexpr bool kC = (Kinds & kFieldC) != 0;
  constexpr std::size_t offA = kE ? 3 : 0;
  constexpr std::size_t offC = offA + (kA ? 3 : 0);

  const std::size_t cs = plan.chunk_size;
  const double n_mesh = static_cast<double>(field.grid().mesh_density);

  // Phase of mode n = chunk base b + offset k is rotated from exp(i w_b t) by
  // the table exp(i w_k t); both factors are evaluated directly, so the phase
  // error does not accumulate along the chunk.
  const std::size_t first_chunk = range.first / cs;
  const std::size_t last_chunk = range.last / cs;
  std::size_t k_lo = 0;
  std::size_t k_hi = cs;
  if (first_chunk == last_chunk) {
    k_lo = range.first - first_chunk * cs;
    k_hi = range.last - first_chunk * cs + 1;
  }
  std::vector<double> tab_c(cs, 1.0);
  std::vector<double> tab_s(cs, 0.0);
  for (std::size_t k = k_lo; k < k_hi; ++k) {
    const double phase = (static_cast<double>(k) / n_mesh) * t;
    tab_c[k] = std::cos(phase);
    tab_s[k] = std::sin(phase);
  }

  const double* ampE = field.amplitude_e().data();
  const double* ampA = field.amplitude_a().data();
  const double* ampC = field.amplitude_c().data();
  const double* ca[3] = {field.coeff_a(0).data(), field.coeff_a(1).data(), field.coeff_a(2).data()};
  const double* cb[3] = {field.coeff_b(0).data(), field.coeff_b(1).data(), field.coeff_b(2).data()};
  const double* tc = tab_c.data();
  const double* ts = tab_s.data();

  auto fill = [&](std::size_t lo, std::size_t hi, const ChunkView& view) {
    const std::size_t base = view.base();
    const double base_phase = (static_cast<double>(base) / n_mesh) * t;
    const double c0 = std::cos(base_phase);
    const double s0 = std::sin(base_phase);
    double* le[3] = {};
    double* la[3] = {};
    double* lc[3] = {};
    for (int comp = 0; comp < 3; ++comp) {
      if constexpr (kE) le[comp] = view.lane(comp);
      if constexpr (kA) la[comp] = view.lane(offA + comp);
      if constexpr (kC) lc[comp] = view.lane(offC + comp);
    }
    const double *a0 = ca[0], *a1 = ca[1], *a2 = ca[2];
    const double *b0 = cb[0], *b1 = cb[1], *b2 = cb[2];
#pragma omp simd
    for (std::size_t n = lo; n < hi; ++n) {
      const std::size_t k = n - base;
      const std::size_t i = n - 1;
      const double cosv = c0 * tc[k] - s0 * ts[k];
      const double sinv = s0 * tc[k] + c0 * ts[k];
      const double ev0 = b0[i] * sinv - a0[i] * cosv;  // -A cos + B sin
      const double ev1 = b1[i] * sinv - a1[i] * cosv;
      const double ev2 = b2[i] * sinv - a2[i] * cosv;
      if constexpr (kE) {
        le[0][k] = ampE[i] * ev0;
        le[1][k] = ampE[i] * ev1;
        le[2][k] = ampE[i] * ev2;
      }
      if constexpr (kA) {
        la[0][k] = ampA[i] * (a0[i] * sinv + b0[i] * cosv);
        la[1][k] = ampA[i] * (a1[i] * sinv + b1[i] * cosv);
        la[2][k] = ampA[i] * (a2[i] * sinv + b2[i] * cosv);
      }
      if constexpr (kC) {
        lc[0][k] = ampC[i] * ev0;
        lc[1][k] = ampC[i] * ev1;
        lc[2][k] = ampC[i] * ev2;
      }
    }
  };

  const auto lanes = chunked_reduce<W>(range.first, range.last + 1, plan, fill);
  FieldSums out;
  if constexpr (kE) out.e = {lanes[0], lanes[1], lanes[2]};
  if constexpr (kA) out.a = {lanes[offA], lanes[offA + 1], lanes[offA + 2]};
  if constexpr (kC) out.c = {lanes[offC], lanes[offC + 1], lanes[offC + 2]};
  return out;
}

}  // namespace

FieldSums evaluate_fields(const FieldRealization& field, ModeRange range, double t, unsigned kinds,
                          const ReductionPlan& plan) {
  check_range(field, range, kinds);
  if (range.empty() || (kinds & 7u) == 0) return {};
  switch (kinds & 7u) {
    case 1: return evaluate_kernel<1>(field, range, t, plan);
    case 2: return evaluate_kernel<2>(field, range, t, plan);
    case 3: return evaluate_kernel<3>(field, range, t, plan);
    case 4: return evaluate_kernel<4>(field, range, t, plan);
    case 5: return evaluate_kernel<5>(field, range, t, plan);
    case 6: return evaluate_kernel<6>(field, range, t, plan);
    default: return evaluate_kernel<7>(field, range, t, plan);
  }
}

FieldSums evaluate_fields_serial(const FieldRealization& field, ModeRange range, double t,
                                 unsigned kinds) {
  check_range(field, range, kinds);
  FieldSums out;
  if (range.empty()) return out;
  CompensatedLanes<long double, 9> acc;
  for (std::size_t n = range.first; n <= range.last; ++n) {
    const std::size_t i = n - 1;
    const double phase = field.grid().omega(n) * t;
    const double cosv = std::cos(phase);
    const double sinv = std::sin(phase);
    for (int c = 0; c < 3; ++c) {
      const double a = field.coeff_a(c)[i];
      const double b = field.coeff_b(c)[i];
      const double even = b * sinv - a * cosv;
      if (kinds & kFieldE) acc.add(c, field.amplitude_e()[i] * even);
      if (kinds & kFieldA) acc.add(3 + c, field.amplitude_a()[i] * (a * sinv + b * cosv));
      if (kinds & kFieldC) acc.add(6 + c, field.amplitude_c()[i] * even);
    }
  }
  auto lane = [&](std::size_t l) { return static_cast<double>(acc.value(l)); };
  if (kinds & kFieldE) out.e = {lane(0), lane(1), lane(2)};
  if (kinds & kFieldA) out.a = {lane(3), lane(4), lane(5)};
  if (kinds & kFieldC) out.c = {lane(6), lane(7), lane(8)};
  return out;
}

Vec3 eval_E(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan) {
  return evaluate_fields(field, range, t, kFieldE, plan).e;
}

Vec3 eval_A(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan) {
  return evaluate_fields(field, range, t, kFieldA, plan).a;
}

Vec3 eval_C(const FieldRealization& field, ModeRange range, double t, const ReductionPlan& plan) {
  return evaluate_fields(field, range, t, kFieldC, plan).c;
}

std::vector<Vec3> field_terms(const FieldRealization& field, ModeRange range, double t,
                              FieldKind kind) {
  check_range(field, range, kind);
  std::vector<Vec3> terms;
  if (range.empty()) return terms;
  terms.reserve(range.size());
  for (std::size_t n = range.first; n <= range.last; ++n) {
    const std::size_t i = n - 1;
    const double phase = field.grid().omega(n) * t;
    const double cosv = std::cos(phase);
    const double sinv = std::sin(phase);
    Vec3 term;
    for (int c = 0; c < 3; ++c) {
      const double a = field.coeff_a(c)[i];
      const double b = field.coeff_b(c)[i];
      switch (kind) {
        case kFieldE: term[c] = field.amplitude_e()[i] * (b * sinv - a * cosv); break;
        case kFieldA: term[c] = field.amplitude_a()[i] * (a * sinv + b * cosv); break;
        case kFieldC: term[c] = field.amplitude_c()[i] * (b * sinv - a * cosv); break;
      }
    }
    terms.push_back(term);
  }
  return terms;
}

// --- windows -----------------------------------------------------------------

double FieldWindow::last_switch_time() const {
  return switch_log.empty() ? -std::numeric_limits<double>::infinity() : switch_log.back().t;
}

double FieldWindow::linear_shift_magnitude(double t) const {
  return norm(delta_A * t - delta_A_moment);
}

void FieldWindow::validate(const FrequencyGrid& grid) const {
  if (!(n_low < n_high) || n_high > grid.max_mode) {
    throw std::out_of_range("FieldWindow: need 0 <= n_low < n_high <= max_mode, got n_low=" +
                            std::to_string(n_low) + " n_high=" + std::to_string(n_high) +
                            " max_mode=" + std::to_string(grid.max_mode));
  }
}

FieldWindow make_window(const FrequencyGrid& grid, std::size_t n_low, std::size_t n_high) {
  FieldWindow w;
  w.n_low = n_low;
  w.n_high = n_high;
  w.validate(grid);
  return w;
}

BandValues band_values(const FieldRealization& field, const FieldWindow& window, double t,
                       const ReductionPlan& plan) {
  BandValues v;
  v.a_low = evaluate_fields(field, window.a_band(), t, kFieldA, plan).a;
  const FieldSums high = evaluate_fields(field, window.c_band(), t, kFieldA | kFieldC, plan);
  v.c_high = high.c;
  v.a_high = high.a;
  return v;
}

FieldWindow switch_window_with(const FieldWindow& window, const FrequencyGrid& grid,
                               const BandValues& old_values, const BandValues& new_values,
                               double t_switch, std::size_t new_low, std::size_t new_high) {
  if (t_switch < window.last_switch_time()) {
    throw std::invalid_argument("switch_window: switch time precedes the previous switch");
  }
  FieldWindow next = window;
  next.n_low = new_low;
  next.n_high = new_high;
  next.validate(grid);

  const Vec3 mismatch_a = (old_values.a_low - new_values.a_low) + (old_values.a_high - new_values.a_high);
  const Vec3 mismatch_c = old_values.c_high - new_values.c_high;
  next.delta_A += mismatch_a;
  next.delta_C += mismatch_c;
  next.delta_A_moment += t_switch * mismatch_a;
  next.switch_log.push_back(
      {t_switch, window.n_low, window.n_high, new_low, new_high, mismatch_a, mismatch_c});
  return next;
}

FieldWindow switch_window(const FieldWindow& window, const FieldRealization& field, double t_switch,
                          std::size_t new_low, std::size_t new_high, const ReductionPlan& plan) {
  FieldWindow probe = window;
  probe.n_low = new_low;
  probe.n_high = new_high;
  probe.validate(field.grid());
  const BandValues old_values = band_values(field, window, t_switch, plan);
  const BandValues new_values = band_values(field, probe, t_switch, plan);
  return switch_window_with(window, field.grid(), old_values, new_values, t_switch, new_low, new_high);
}

void write_spectrum(std::ostream& out, const FieldRealization& field) {
  out << "# n,omega,amp_E,amp_A,amp_C,A_x,A_y,A_z,B_x,B_y,B_z\n";
  out << "# N=" << field.grid().mesh_density << " max_mode=" << field.grid().max_mode
      << " cutoff_scale=" << field.cutoff_scale() << " seed=" << field.seed() << '\n';
  char buf[512];
  for (std::size_t n = 1; n <= field.mode_count(); ++n) {
    const std::size_t i = n - 1;
    std::snprintf(buf, sizeof buf,
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n,
                  field.grid().omega(n), field.amplitude_e()[i], field.amplitude_a()[i],
                  field.amplitude_c()[i], field.coeff_a(0)[i], field.coeff_a(1)[i],
                  field.coeff_a(2)[i], field.coeff_b(0)[i], field.coeff_b(1)[i],
                  field.coeff_b(2)[i]);
    out << buf;
  }
}

}  // namespace sedsim
