#pragma once

// Ensemble orchestration: per-trajectory seeds, trajectory workers, pooled
// histograms and run summaries.
//
// Seeds: trajectory i of master seed m uses key k_i = derive_seed(m, i) and
// the sub-streams derive_seed(k_i, 0) (field coefficients),
// derive_seed(k_i, 1) (initial condition) and derive_seed(k_i, 2) (energy
// floor pushes).

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sedsim/config.hpp"
#include "sedsim/conjecture.hpp"
#include "sedsim/integrator.hpp"

namespace sedsim {

struct TrajectorySeeds {
  std::uint64_t trajectory = 0;
  std::uint64_t field = 0;
  std::uint64_t initial = 0;
  std::uint64_t push = 0;
};

TrajectorySeeds trajectory_seeds(std::uint64_t master_seed, std::uint64_t index);
TrajectorySeeds seeds_from_trajectory_key(std::uint64_t key);

/// Everything a worker needs for one trajectory.
struct PreparedTrajectory {
  std::uint64_t index = 0;
  TrajectorySeeds seeds;
  TrajectorySetup setup;
  std::shared_ptr<const FieldRealization> field;  ///< null when the field is off
  FieldWindow window;
  std::optional<InitialCondition> initial;         ///< set for sampled starts
};

/// Builds the setup, field realization and start window for trajectory `index`.
PreparedTrajectory prepare_trajectory(const RunConfig& config, std::uint64_t index);
/// Same for an explicit trajectory key (used by resume).
PreparedTrajectory prepare_trajectory_with_key(const RunConfig& config, std::uint64_t index,
                                               std::uint64_t key);

struct RunSummary {
  double t_total = 0.0;           ///< Bohr times of the orbit (units of tau_0(Z))
  double t_total_seconds = 0.0;
  double t_damp = 0.0;            ///< damping time 1/beta^2 in Bohr times
  double n_orbit_nominal = 0.0;   ///< t_total / (2 pi)
  std::uint64_t n_orbit_actual = 0;
  double n_damp = 0.0;            ///< t_total / t_damp
  std::optional<double> ionisation_time;
  bool aborted = false;
};

RunSummary summarize(const TrajectoryRecord& record, const PhysicalConstants& constants);

/// Samples before the ionisation time (all samples when none).
std::vector<Sample> samples_before_ionisation(const TrajectoryRecord& record);

struct PooledHistograms {
  HistogramReport energy;        ///< E on [-2, 0]
  HistogramReport eccentricity;  ///< eps on [0, 1]
  HistogramReport radius;        ///< r on [0, 8]
};

/// Pools pre-ionisation samples of all records. Throws std::invalid_argument
/// when no sample remains.
PooledHistograms pool_histograms(const std::vector<TrajectoryRecord>& records, std::size_t bins);

/// Writes energy.csv, eccentricity.csv and radius.csv under dir.
void write_histograms(const std::string& dir, const PooledHistograms& h);

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAllIonised = 2,
  kExitAbort = 3,
  kExitCheckFailed = 4,
};

/// kExitAbort if any record aborted, else kExitAllIonised if every record
/// ionised, else kExitOk.
int ensemble_exit_code(const std::vector<TrajectoryRecord>& records);

struct EnsembleOptions {
  bool write_files = true;
  std::ostream* log = nullptr;
};

struct EnsembleResult {
  std::vector<TrajectoryRecord> records;
  std::vector<RunSummary> summaries;
  std::vector<std::string> failures;  ///< per-trajectory setup errors, empty when none
  std::optional<PooledHistograms> histograms;
  int exit_code = kExitOk;
};

/// Runs every trajectory of the ensemble (concurrently when OpenMP allows)
/// and, with write_files, writes records, checkpoints, summaries and
/// histograms under config.output_dir.
EnsembleResult run_ensemble(const RunConfig& config, const EnsembleOptions& options = {});

/// Continues a trajectory from a checkpoint file; writes its record next to
/// the checkpoint's output directory when write_files is set.
struct ResumeResult {
  RunConfig config;
  std::uint64_t index = 0;
  TrajectoryRecord record;
  RunSummary summary;
  int exit_code = kExitOk;
};
ResumeResult resume_trajectory(const std::string& checkpoint_path,
                               const EnsembleOptions& options = {});

/// File names used under output_dir.
std::string record_path(const RunConfig& config, std::uint64_t index);
std::string checkpoint_path(const RunConfig& config, std::uint64_t index);

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries);

}  // namespace sedsim
