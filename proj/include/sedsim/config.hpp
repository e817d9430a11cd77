#pragma once

// Run configuration: a `key = value` document, one entry per line, `#`
// starts a comment. Unknown keys, duplicate keys and malformed values are
// errors that name the key. Required: Z, N, seed, and n_harm when
// cutoff = moving. Every other key has a documented default (docs/FORMATS.md).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sedsim/dynamics.hpp"
#include "sedsim/field.hpp"
#include "sedsim/integrator.hpp"

namespace sedsim {

enum class RecordFormat { csv, binary };
enum class InitialSource { conjecture, explicit_state };

struct RunConfig {
  int Z = 1;
  double alpha = kFineStructure;
  std::optional<double> beta;          ///< overrides sqrt(2/3) Z alpha^1.5
  std::optional<double> cutoff_scale;  ///< overrides Z^2 alpha^2
  std::int64_t N = 1;
  std::size_t max_mode = 0;            ///< 0: derived from the cutoff policy
  Formulation formulation = Formulation::s_form;
  IntegratorConfig integrator;         ///< cutoff defaults to moving here
  std::optional<std::size_t> n_low;    ///< fixed window override
  std::optional<std::size_t> n_high;
  bool field_on = true;
  InitialMapping mapping = InitialMapping::exact;
  InitialSource initial = InitialSource::conjecture;
  Vec3 initial_r{1.0, 0.0, 0.0};
  Vec3 initial_v{0.0, 1.0, 0.0};
  double t_max = 6.283185307179586e4;  ///< 10^4 Bohr periods
  std::uint64_t max_orbits = 0;
  std::uint64_t ensemble_size = 1;
  std::uint64_t seed = 0;
  std::uint64_t sample_stride = 4000;
  ReductionPlan plan;
  std::string output_dir = "sedsim_out";
  RecordFormat record_format = RecordFormat::csv;
  std::uint64_t checkpoint_every = 0;  ///< steps; 0 disables checkpoints
  std::size_t histogram_bins = 50;

  RunConfig();

  PhysicalConstants constants() const;
  FrequencyGrid grid() const;
  /// Window at the start energy E0 (moving) or the fixed bounds.
  FieldWindow initial_window(double E0) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws std::invalid_argument (message names the key) on any error.
RunConfig parse_config(std::string_view text);
/// Emits every key; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& c);

std::string_view to_string(RecordFormat f);
std::string_view to_string(CutoffPolicy p);
std::string_view to_string(FieldSampling s);

}  // namespace sedsim
