#include "sedsim/field_check.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sedsim/correlation.hpp"
#include "sedsim/field.hpp"
#include "sedsim/rng.hpp"

namespace sedsim {

CorrelationReport correlation_check(const CorrelationCheckConfig& cfg) {
  if (cfg.seeds == 0 || cfg.origins == 0 || cfg.lags.empty()) {
    throw std::invalid_argument("correlation_check: seeds, origins and lags must be non-empty");
  }
  const auto start = std::chrono::steady_clock::now();
  const FrequencyGrid grid{cfg.N, cfg.max_mode};
  grid.validate();
  const double period = 2.0 * std::numbers::pi * static_cast<double>(cfg.N);
  const std::size_t L = cfg.lags.size();
  std::vector<double> ee(L, 0.0), aa(L, 0.0);

  for (std::uint64_t k = 0; k < cfg.seeds; ++k) {
    const FieldRealization field =
        FieldRealization::build(derive_seed(cfg.master_seed, k), grid, cfg.cutoff_scale);
    const ModeRange all = field.all_modes();
    for (std::size_t j = 0; j < cfg.origins; ++j) {
      const double s = period * static_cast<double>(j) / static_cast<double>(cfg.origins);
      const FieldSums base = evaluate_fields(field, all, s, kFieldE | kFieldA, cfg.plan);
      for (std::size_t l = 0; l < L; ++l) {
        const FieldSums lag = cfg.lags[l] == 0.0
                                  ? base
                                  : evaluate_fields(field, all, s + cfg.lags[l],
                                                    kFieldE | kFieldA, cfg.plan);
        ee[l] += dot(base.e, lag.e);
        aa[l] += dot(base.a, lag.a);
      }
    }
  }

  CorrelationReport rep;
  rep.pass = true;
  const double count = 3.0 * static_cast<double>(cfg.seeds) * static_cast<double>(cfg.origins);
  const double n = static_cast<double>(cfg.N);
  for (std::size_t l = 0; l < L; ++l) {
    CorrelationLag x;
    x.t = cfg.lags[l];
    x.ee = ee[l] / count;
    x.aa = aa[l] / count;
    x.ee_theory = correlation_EE_theory(x.t, n, cfg.cutoff_scale);
    x.aa_theory = correlation_AA_theory(x.t, n, cfg.cutoff_scale);
    x.ee_rel = std::abs(x.ee - x.ee_theory) / std::abs(x.ee_theory);
    x.aa_rel = std::abs(x.aa - x.aa_theory) / std::abs(x.aa_theory);
    if (!(x.ee_rel <= cfg.tolerance && x.aa_rel <= cfg.tolerance)) rep.pass = false;
    rep.lags.push_back(x);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace sedsim
