#pragma once

// Chunked tree reduction of long per-mode sums.
//
// Terms are grouped into fixed chunks aligned to absolute term indices
// (chunk c holds indices [c*chunk_size, (c+1)*chunk_size)). Each chunk is
// reduced by pairwise halving in log2(chunk_size) steps, the first half of
// the chunk being added onto the second half at every step. Chunk results are
// then combined in ascending chunk order with a compensated (Neumaier) sum.
// Chunks may run on any number of OpenMP workers; the result does not depend
// on the worker count or on scheduling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <omp.h>

#include "sedsim/vec3.hpp"

namespace sedsim {

enum class Precision {
  extended,     ///< double chunk interiors, compensated combine
  mixed_float,  ///< float chunk interiors (GPU-style), compensated double combine
};

struct ReductionPlan {
  std::size_t chunk_size = 256;
  Precision precision = Precision::extended;
  int worker_count = 0;  ///< 0: OpenMP default
  /// Sort materialised terms by ascending magnitude before chunking
  /// (chunked_sum only).
  bool sort_by_magnitude = false;
  /// Fewer chunks than this run on the calling thread.
  std::size_t min_parallel_chunks = 64;

  /// log2(chunk_size).
  int tree_depth() const;
  /// Throws std::invalid_argument unless chunk_size is a power of two >= 2.
  void validate() const;

  friend bool operator==(const ReductionPlan&, const ReductionPlan&) = default;
};

/// Neumaier compensated accumulator over `Width` independent lanes.
template <typename T, std::size_t Width>
struct CompensatedLanes {
  std::array<T, Width> sum{};
  std::array<T, Width> carry{};

  void add(std::size_t lane, T x) {
    const T s = sum[lane];
    const T t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      carry[lane] += (s - t) + x;
    } else {
      carry[lane] += (x - t) + s;
    }
    sum[lane] = t;
  }
  T value(std::size_t lane) const { return sum[lane] + carry[lane]; }
};

namespace detail {

template <typename T>
inline void tree_halve(T* x, std::size_t n) {
  for (std::size_t half = n / 2; half >= 1; half /= 2) {
    for (std::size_t i = 0; i < half; ++i) x[i] += x[i + half];
  }
}

/// Per-thread scratch for one chunk: Width lanes of chunk_size doubles, plus a
/// float mirror for mixed precision.
struct ChunkScratch {
  std::vector<double> lanes;
  std::vector<float> narrow;
};

ChunkScratch& thread_scratch();

}  // namespace detail

/// View handed to a fill callback: lane l, absolute index i lives at
/// lane(l)[i - base]. Positions the callback does not write stay zero.
class ChunkView {
 public:
  ChunkView(double* data, std::size_t chunk_size, std::size_t base)
      : data_(data), chunk_size_(chunk_size), base_(base) {}
  double* lane(std::size_t l) const { return data_ + l * chunk_size_; }
  std::size_t base() const { return base_; }

 private:
  double* data_;
  std::size_t chunk_size_;
  std::size_t base_;
};

/// Reduces Width-lane terms over absolute indices [first, last).
/// `fill(lo, hi, view)` must write every lane for indices [lo, hi) of one chunk.
template <std::size_t Width, typename Fill>
std::array<double, Width> chunked_reduce(std::size_t first, std::size_t last,
                                         const ReductionPlan& plan, Fill&& fill) {
  std::array<double, Width> out{};
  if (last <= first) return out;
  const std::size_t cs = plan.chunk_size;
  const std::size_t c_lo = first / cs;
  const std::size_t c_hi = (last - 1) / cs + 1;
  const std::size_t n_chunks = c_hi - c_lo;
  std::vector<std::array<double, Width>> partial(n_chunks);

  auto run_chunk = [&](std::size_t k) {
    detail::ChunkScratch& scratch = detail::thread_scratch();
    scratch.lanes.resize(Width * cs);
    const std::size_t base = (c_lo + k) * cs;
    const std::size_t lo = std::max(first, base);
    const std::size_t hi = std::min(last, base + cs);
    if (lo != base || hi != base + cs) {
      // Only edge chunks have uncovered positions.
      std::fill(scratch.lanes.begin(), scratch.lanes.end(), 0.0);
    }
    fill(lo, hi, ChunkView(scratch.lanes.data(), cs, base));
    if (plan.precision == Precision::mixed_float) {
      scratch.narrow.resize(cs);
      for (std::size_t l = 0; l < Width; ++l) {
        const double* src = scratch.lanes.data() + l * cs;
        for (std::size_t i = 0; i < cs; ++i) scratch.narrow[i] = static_cast<float>(src[i]);
        detail::tree_halve(scratch.narrow.data(), cs);
        partial[k][l] = static_cast<double>(scratch.narrow[0]);
      }
    } else {
      for (std::size_t l = 0; l < Width; ++l) {
        double* x = scratch.lanes.data() + l * cs;
        detail::tree_halve(x, cs);
        partial[k][l] = x[0];
      }
    }
  };

  const bool parallel = n_chunks >= plan.min_parallel_chunks && !omp_in_parallel();
  if (parallel) {
    const int workers = plan.worker_count > 0 ? plan.worker_count : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::size_t k = 0; k < n_chunks; ++k) run_chunk(k);
  } else {
    for (std::size_t k = 0; k < n_chunks; ++k) run_chunk(k);
  }

  CompensatedLanes<double, Width> acc;
  for (std::size_t k = 0; k < n_chunks; ++k) {
    for (std::size_t l = 0; l < Width; ++l) acc.add(l, partial[k][l]);
  }
  for (std::size_t l = 0; l < Width; ++l) out[l] = acc.value(l);
  return out;
}

/// Chunked tree sum of materialised 3-vector terms. Throws on empty input.
Vec3 chunked_sum(std::span<const Vec3> terms, const ReductionPlan& plan = {});

/// Serial reference: index-order compensated sum in long double.
Vec3 serial_sum_reference(std::span<const Vec3> terms);

struct PrecisionAudit {
  Vec3 working;          ///< chunked sum under the plan
  Vec3 reference;        ///< serial extended-precision sum
  double discrepancy = 0.0;           ///< |working - reference|
  double relative_discrepancy = 0.0;  ///< discrepancy / |reference| (0 if both vanish)
  double first_harmonic_strength = 0.0;  ///< sum of |term| over the first harmonic band
  double harmonic_ratio = 0.0;        ///< discrepancy / first_harmonic_strength
};

/// Compares the plan's chunked sum against the serial reference. The first
/// `first_harmonic_terms` entries are taken as the lowest retained harmonic.
PrecisionAudit precision_audit(std::span<const Vec3> terms, const ReductionPlan& plan,
                               std::size_t first_harmonic_terms);

}  // namespace sedsim
