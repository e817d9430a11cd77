#pragma once

// Field values on the node lattice t_j = j T / M over one full period
// T = 2 pi N, computed for all j at once by an inverse real FFT: with
// omega_n t_j = 2 pi n j / M every mode sum is an M-point DFT. Values repeat
// with period M in j.

#include <cstdint>
#include <vector>

#include "sedsim/dynamics.hpp"
#include "sedsim/field.hpp"

namespace sedsim {

class FieldTable {
 public:
  /// Smallest power of two M with M >= refreshes_per_period * n_high, i.e.
  /// node spacing T / M at most the interpolation refresh spacing.
  static std::size_t table_size(const FieldWindow& window, int refreshes_per_period);

  /// Tabulates what `form` needs under `window`. Throws std::invalid_argument
  /// when M is not above 2 n_high.
  FieldTable(const FieldRealization& field, const FieldWindow& window, Formulation form,
             std::size_t size);

  std::size_t size() const { return size_; }
  double spacing() const { return spacing_; }
  /// Node value at t_j (j taken modulo M).
  FieldInput node(std::int64_t j) const;

 private:
  std::size_t size_ = 0;
  double spacing_ = 0.0;
  // Series order: e, a_low, c_high, a_high; each 3 components of M values.
  std::vector<double> series_[4][3];
};

}  // namespace sedsim
