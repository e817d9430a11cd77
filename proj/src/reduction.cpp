#include "sedsim/reduction.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace sedsim {

int ReductionPlan::tree_depth() const { return std::countr_zero(chunk_size); }

void ReductionPlan::validate() const {
  if (chunk_size < 2 || !std::has_single_bit(chunk_size)) {
    throw std::invalid_argument("ReductionPlan: chunk_size must be a power of two >= 2");
  }
  if (worker_count < 0) throw std::invalid_argument("ReductionPlan: worker_count < 0");
}

namespace detail {

ChunkScratch& thread_scratch() {
  thread_local ChunkScratch scratch;
  return scratch;
}

}  // namespace detail

Vec3 chunked_sum(std::span<const Vec3> terms, const ReductionPlan& plan) {
  if (terms.empty()) throw std::invalid_argument("chunked_sum: empty input");
  plan.validate();

  std::vector<Vec3> sorted;
  std::span<const Vec3> src = terms;
  if (plan.sort_by_magnitude) {
    sorted.assign(terms.begin(), terms.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Vec3& a, const Vec3& b) { return norm2(a) < norm2(b); });
    src = sorted;
  }

  const auto lanes = chunked_reduce<3>(0, src.size(), plan,
                                       [&](std::size_t lo, std::size_t hi, const ChunkView& v) {
                                         double* x = v.lane(0);
                                         double* y = v.lane(1);
                                         double* z = v.lane(2);
                                         for (std::size_t i = lo; i < hi; ++i) {
                                           x[i - v.base()] = src[i].x;
                                           y[i - v.base()] = src[i].y;
                                           z[i - v.base()] = src[i].z;
                                         }
                                       });
  return {lanes[0], lanes[1], lanes[2]};
}

Vec3 serial_sum_reference(std::span<const Vec3> terms) {
  CompensatedLanes<long double, 3> acc;
  for (const Vec3& t : terms) {
    acc.add(0, t.x);
    acc.add(1, t.y);
    acc.add(2, t.z);
  }
  return {static_cast<double>(acc.value(0)), static_cast<double>(acc.value(1)),
          static_cast<double>(acc.value(2))};
}

PrecisionAudit precision_audit(std::span<const Vec3> terms, const ReductionPlan& plan,
                               std::size_t first_harmonic_terms) {
  PrecisionAudit audit;
  if (terms.empty()) return audit;
  audit.working = chunked_sum(terms, plan);
  audit.reference = serial_sum_reference(terms);
  audit.discrepancy = norm(audit.working - audit.reference);
  const double ref_norm = norm(audit.reference);
  audit.relative_discrepancy = ref_norm > 0.0 ? audit.discrepancy / ref_norm : audit.discrepancy;
  const std::size_t band = std::min(first_harmonic_terms, terms.size());
  for (std::size_t i = 0; i < band; ++i) audit.first_harmonic_strength += norm(terms[i]);
  audit.harmonic_ratio = audit.first_harmonic_strength > 0.0
                             ? audit.discrepancy / audit.first_harmonic_strength
                             : 0.0;
  return audit;
}

}  // namespace sedsim
