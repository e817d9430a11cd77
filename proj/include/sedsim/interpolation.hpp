#pragma once

// Five-node Lagrange interpolation of the field between exact refreshes.
// Nodes sit on the lattice anchor + j h; each evaluation interval uses the
// five nodes centred on it, so every RK4 stage time is interior.

#include <array>
#include <cstdint>
#include <deque>
#include <memory>

#include "sedsim/dynamics.hpp"
#include "sedsim/field.hpp"
#include "sedsim/field_table.hpp"

namespace sedsim {

/// Weights w_j with p(t) = sum_j w_j y_j for the degree-4 interpolant.
std::array<double, 5> lagrange_weights(const std::array<double, 5>& nodes, double t);

/// Exact field values the formulation needs under `window`.
FieldInput sample_fields(const FieldRealization& field, const FieldWindow& window,
                         Formulation form, double t, const ReductionPlan& plan = {});

/// (2 pi / omega(n_high)) / refreshes_per_period.
double refresh_spacing(const FrequencyGrid& grid, const FieldWindow& window,
                       int refreshes_per_period);

class FieldInterpolant {
 public:
  /// Throws std::invalid_argument for an empty window or spacing <= 0.
  FieldInterpolant(const FieldRealization& field, const FieldWindow& window, Formulation form,
                   double anchor, double spacing, const ReductionPlan& plan = {});

  /// Nodes read from a precomputed table: lattice j T / M, anchor 0.
  explicit FieldInterpolant(std::shared_ptr<const FieldTable> table);

  /// Centres the stencil on `center` (the middle of the next step).
  void select(double center);
  /// Interpolated value on the selected stencil.
  FieldInput value(double t) const;

  /// Moves to a new window; the node lattice restarts at `anchor`.
  void rebase(const FieldWindow& window, double anchor);

  double anchor() const { return anchor_; }
  double spacing() const { return spacing_; }
  const std::array<double, 5>& stencil_times() const { return times_; }
  std::uint64_t exact_evaluations() const { return evaluations_; }

 private:
  const FieldInput& node(std::int64_t j);

  const FieldRealization* field_ = nullptr;
  std::shared_ptr<const FieldTable> table_;
  FieldWindow window_;
  Formulation form_ = Formulation::s_form;
  double anchor_ = 0.0;
  double spacing_ = 0.0;
  ReductionPlan plan_;
  std::deque<std::pair<std::int64_t, FieldInput>> cache_;
  std::array<double, 5> times_{};
  std::array<FieldInput, 5> values_{};
  std::uint64_t evaluations_ = 0;
};

/// Interpolant anchored at t_start with the refresh cadence of `window`.
FieldInterpolant build_field_interpolant(const FieldRealization& field, const FieldWindow& window,
                                         Formulation form, double t_start,
                                         int refreshes_per_period, const ReductionPlan& plan = {});

}  // namespace sedsim
