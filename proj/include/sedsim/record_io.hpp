#pragma once

// Persistence: trajectory records (delimited text or length-prefixed binary),
// checkpoints for exact resume, and histogram export. Byte layouts are
// documented in docs/FORMATS.md.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sedsim/conjecture.hpp"
#include "sedsim/integrator.hpp"

namespace sedsim {

/// Thrown for malformed or truncated input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_record_csv(std::ostream& out, const TrajectoryRecord& record);
TrajectoryRecord read_record_csv(std::istream& in);

void write_record_binary(std::ostream& out, const TrajectoryRecord& record);
TrajectoryRecord read_record_binary(std::istream& in);

/// Picks the reader from the leading bytes.
TrajectoryRecord read_record_file(const std::string& path);

struct CheckpointFile {
  std::string config_text;  ///< emit_config of the run
  std::uint64_t trajectory_index = 0;
  std::uint64_t trajectory_seed = 0;
  TrajectoryCheckpoint checkpoint;
};

void write_checkpoint(std::ostream& out, const CheckpointFile& file);
CheckpointFile read_checkpoint(std::istream& in);

/// Columns bin_lo,bin_hi,count,height,pdf with a commented header carrying
/// the quantity name, sample counts and KS statistics.
void write_histogram_csv(std::ostream& out, const std::string& quantity,
                         const HistogramReport& report);

std::string_view to_string(EventKind k);

}  // namespace sedsim
