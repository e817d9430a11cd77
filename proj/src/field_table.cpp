#include "sedsim/field_table.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace sedsim {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

enum class Series { e, a_low, c_high, a_high };

}  // namespace

std::size_t FieldTable::table_size(const FieldWindow& window, int refreshes_per_period) {
  if (refreshes_per_period < 1) throw std::invalid_argument("refreshes per period must be >= 1");
  const std::size_t want = static_cast<std::size_t>(refreshes_per_period) * window.n_high;
  return std::bit_ceil(std::max(want, 2 * window.n_high + 1));
}

FieldTable::FieldTable(const FieldRealization& field, const FieldWindow& window, Formulation form,
                       std::size_t size)
    : size_(size) {
  if (window.full_band().empty()) throw std::invalid_argument("FieldTable: empty window");
  if (size % 2 != 0 || size <= 2 * window.n_high) {
    throw std::invalid_argument("FieldTable: size must be even and exceed 2 n_high");
  }
  const double period = 2.0 * std::numbers::pi * static_cast<double>(field.grid().mesh_density);
  spacing_ = period / static_cast<double>(size);

  const std::size_t half = size / 2 + 1;
  std::unique_ptr<fftw_complex, FftwFree> in(fftw_alloc_complex(half));
  std::unique_ptr<double, FftwFree> out(fftw_alloc_real(size));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(size), in.get(), out.get(), FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("FieldTable: FFTW planning failed");

  const auto amp_e = field.amplitude_e();
  const auto amp_a = field.amplitude_a();
  const auto amp_c = field.amplitude_c();

  // Sum alpha_n cos(w_n t) + beta_n sin(w_n t) over `band` via X_n = (alpha - i beta) / 2.
  auto tabulate = [&](Series s, ModeRange band) {
    const int slot = static_cast<int>(s);
    for (int comp = 0; comp < 3; ++comp) {
      const auto A = field.coeff_a(comp);
      const auto B = field.coeff_b(comp);
      for (std::size_t k = 0; k < half; ++k) in.get()[k][0] = in.get()[k][1] = 0.0;
      for (std::size_t n = band.first; n <= band.last && !band.empty(); ++n) {
        const std::size_t i = n - 1;
        double alpha = 0.0;
        double beta = 0.0;
        switch (s) {
          case Series::e:
            alpha = -amp_e[i] * A[i];
            beta = amp_e[i] * B[i];
            break;
          case Series::c_high:
            alpha = -amp_c[i] * A[i];
            beta = amp_c[i] * B[i];
            break;
          case Series::a_low:
          case Series::a_high:
            alpha = amp_a[i] * B[i];
            beta = amp_a[i] * A[i];
            break;
        }
        in.get()[n][0] = 0.5 * alpha;
        in.get()[n][1] = -0.5 * beta;
      }
      fftw_execute_dft_c2r(plan, in.get(), out.get());
      series_[slot][comp].assign(out.get(), out.get() + size);
    }
  };

  switch (form) {
    case Formulation::newton:
      tabulate(Series::e, window.full_band());
      break;
    case Formulation::mixed:
      tabulate(Series::a_low, window.a_band());
      [[fallthrough]];
    case Formulation::s_form:
    case Formulation::pure_gc:
      tabulate(Series::c_high, window.c_band());
      tabulate(Series::a_high, window.c_band());
      break;
  }

  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

FieldInput FieldTable::node(std::int64_t j) const {
  const auto m = static_cast<std::int64_t>(size_);
  const auto idx = static_cast<std::size_t>(((j % m) + m) % m);
  auto pick = [&](Series s) {
    const auto& v = series_[static_cast<int>(s)];
    if (v[0].empty()) return Vec3{};
    return Vec3{v[0][idx], v[1][idx], v[2][idx]};
  };
  FieldInput out;
  out.e = pick(Series::e);
  out.a_low = pick(Series::a_low);
  out.c_high = pick(Series::c_high);
  out.a_high = pick(Series::a_high);
  return out;
}

}  // namespace sedsim
