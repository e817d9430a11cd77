#include "sedsim/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sedsim {

std::array<double, 5> lagrange_weights(const std::array<double, 5>& nodes, double t) {
  std::array<double, 5> w{};
  for (int j = 0; j < 5; ++j) {
    double num = 1.0;
    double den = 1.0;
    for (int m = 0; m < 5; ++m) {
      if (m == j) continue;
      num *= t - nodes[m];
      den *= nodes[j] - nodes[m];
    }
    w[j] = num / den;
  }
  return w;
}

FieldInput sample_fields(const FieldRealization& field, const FieldWindow& window,
                         Formulation form, double t, const ReductionPlan& plan) {
  FieldInput in;
  switch (form) {
    case Formulation::newton:
      in.e = evaluate_fields(field, window.full_band(), t, kFieldE, plan).e;
      break;
    case Formulation::mixed:
      in.a_low = evaluate_fields(field, window.a_band(), t, kFieldA, plan).a;
      [[fallthrough]];
    case Formulation::s_form:
    case Formulation::pure_gc: {
      const FieldSums high = evaluate_fields(field, window.c_band(), t, kFieldA | kFieldC, plan);
      in.c_high = high.c;
      in.a_high = high.a;
      break;
    }
  }
  return in;
}

double refresh_spacing(const FrequencyGrid& grid, const FieldWindow& window,
                       int refreshes_per_period) {
  if (refreshes_per_period < 1) throw std::invalid_argument("refreshes per period must be >= 1");
  return 2.0 * std::numbers::pi / grid.omega(window.n_high) / refreshes_per_period;
}

FieldInterpolant::FieldInterpolant(const FieldRealization& field, const FieldWindow& window,
                                   Formulation form, double anchor, double spacing,
                                   const ReductionPlan& plan)
    : field_(&field), window_(window), form_(form), anchor_(anchor), spacing_(spacing), plan_(plan) {
  if (window.full_band().empty()) throw std::invalid_argument("FieldInterpolant: empty window");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("FieldInterpolant: spacing must be positive");
  }
  window_.switch_log.clear();
  select(anchor);
}

FieldInterpolant::FieldInterpolant(std::shared_ptr<const FieldTable> table)
    : table_(std::move(table)), anchor_(0.0) {
  if (!table_) throw std::invalid_argument("FieldInterpolant: null table");
  spacing_ = table_->spacing();
  select(0.0);
}

const FieldInput& FieldInterpolant::node(std::int64_t j) {
  for (const auto& [idx, val] : cache_) {
    if (idx == j) return val;
  }
  if (table_) {
    cache_.emplace_back(j, table_->node(j));
    return cache_.back().second;
  }
  const double tj = anchor_ + static_cast<double>(j) * spacing_;
  cache_.emplace_back(j, sample_fields(*field_, window_, form_, tj, plan_));
  ++evaluations_;
  return cache_.back().second;
}

void FieldInterpolant::select(double center) {
  const auto j0 = static_cast<std::int64_t>(std::floor((center - anchor_) / spacing_ + 0.5));
  if (!cache_.empty() && times_[2] == anchor_ + static_cast<double>(j0) * spacing_) return;
  while (!cache_.empty() && cache_.front().first < j0 - 2) cache_.pop_front();
  for (int k = 0; k < 5; ++k) {
    const std::int64_t j = j0 - 2 + k;
    times_[k] = anchor_ + static_cast<double>(j) * spacing_;
    values_[k] = node(j);
  }
  // Out-of-order requests (rare) leave stale nodes behind; keep the cache small.
  while (cache_.size() > 8) cache_.pop_front();
}

FieldInput FieldInterpolant::value(double t) const {
  const auto w = lagrange_weights(times_, t);
  FieldInput out;
  for (int k = 0; k < 5; ++k) {
    if (t == times_[k]) return values_[k];
    out = out + w[k] * values_[k];
  }
  return out;
}

void FieldInterpolant::rebase(const FieldWindow& window, double anchor) {
  if (table_) throw std::logic_error("FieldInterpolant: a tabulated interpolant cannot rebase");
  if (window.full_band().empty()) throw std::invalid_argument("FieldInterpolant: empty window");
  window_.n_low = window.n_low;
  window_.n_high = window.n_high;
  anchor_ = anchor;
  cache_.clear();
  select(anchor);
}

FieldInterpolant build_field_interpolant(const FieldRealization& field, const FieldWindow& window,
                                         Formulation form, double t_start,
                                         int refreshes_per_period, const ReductionPlan& plan) {
  return FieldInterpolant(field, window, form, t_start,
                          refresh_spacing(field.grid(), window, refreshes_per_period), plan);
}

}  // namespace sedsim
