#pragma once

// Empirical two-point functions of synthesized fields against the closed
// forms: <E_a(s + t) E_a(s)> and <A_a(s + t) A_a(s)> averaged over seeds,
// components and origins s spread evenly over the field period 2 pi N.

#include <cstdint>
#include <vector>

#include "sedsim/reduction.hpp"

namespace sedsim {

struct CorrelationCheckConfig {
  std::int64_t N = 1000;
  std::size_t max_mode = 50000;
  std::uint64_t seeds = 200;
  std::size_t origins = 256;
  double cutoff_scale = 10.0;
  std::vector<double> lags{0.0, 0.5, 1.0, 5.0};
  std::uint64_t master_seed = 1;
  double tolerance = 0.05;
  ReductionPlan plan;
};

struct CorrelationLag {
  double t = 0.0;
  double ee = 0.0;
  double ee_theory = 0.0;
  double aa = 0.0;
  double aa_theory = 0.0;
  double ee_rel = 0.0;
  double aa_rel = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelationLag> lags;
  double seconds = 0.0;
  bool pass = false;  ///< every relative error within tolerance
};

CorrelationReport correlation_check(const CorrelationCheckConfig& config);

}  // namespace sedsim
