#include "sedsim/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sedsim/record_io.hpp"
#include "sedsim/reduction.hpp"

namespace sedsim {

namespace fs = std::filesystem;

TrajectorySeeds seeds_from_trajectory_key(std::uint64_t key) {
  return {key, derive_seed(key, 0), derive_seed(key, 1), derive_seed(key, 2)};
}

TrajectorySeeds trajectory_seeds(std::uint64_t master_seed, std::uint64_t index) {
  return seeds_from_trajectory_key(derive_seed(master_seed, index));
}

PreparedTrajectory prepare_trajectory_with_key(const RunConfig& config, std::uint64_t index,
                                               std::uint64_t key) {
  PreparedTrajectory p;
  p.index = index;
  p.seeds = seeds_from_trajectory_key(key);

  TrajectorySetup& s = p.setup;
  s.constants = config.constants();
  s.formulation = config.formulation;
  s.integrator = config.integrator;
  s.mapping = config.mapping;
  s.plan = config.plan;
  s.field_on = config.field_on;
  s.t_max = config.t_max;
  s.max_orbits = config.max_orbits;
  s.sample_stride = config.sample_stride;
  s.t0 = 0.0;
  s.push_rng_key = p.seeds.push;

  if (config.initial == InitialSource::conjecture) {
    CounterRng rng(p.seeds.initial);
    p.initial = sample_initial_conditions(rng);
    s.start = p.initial->point;
  } else {
    s.start = {config.initial_r, config.initial_v};
  }

  if (config.field_on) {
    const double scale = config.cutoff_scale.value_or(s.constants.cutoff_scale());
    p.field = std::make_shared<const FieldRealization>(
        FieldRealization::build(p.seeds.field, config.grid(), scale));
    p.window = config.initial_window(orbit_elements(s.start.r, s.start.v).E);
  }
  return p;
}

PreparedTrajectory prepare_trajectory(const RunConfig& config, std::uint64_t index) {
  return prepare_trajectory_with_key(config, index, derive_seed(config.seed, index));
}

RunSummary summarize(const TrajectoryRecord& record, const PhysicalConstants& constants) {
  RunSummary s;
  const double t0 = record.samples.empty() ? 0.0 : record.samples.front().t;
  s.t_total = record.samples.empty() ? 0.0 : record.t_end - t0;
  s.t_total_seconds = s.t_total * constants.bohr_time_seconds();
  s.t_damp = constants.damping_time();
  s.n_orbit_nominal = s.t_total / (2.0 * std::numbers::pi);
  s.n_orbit_actual = record.passages;
  s.n_damp = std::isfinite(s.t_damp) ? s.t_total / s.t_damp : 0.0;
  s.ionisation_time = record.ionisation_time;
  s.aborted = record.aborted;
  return s;
}

std::vector<Sample> samples_before_ionisation(const TrajectoryRecord& record) {
  std::vector<Sample> out;
  for (const Sample& x : record.samples) {
    if (record.ionisation_time && x.t >= *record.ionisation_time) break;
    out.push_back(x);
  }
  return out;
}

PooledHistograms pool_histograms(const std::vector<TrajectoryRecord>& records, std::size_t bins) {
  std::vector<double> e, eps, r;
  for (const TrajectoryRecord& rec : records) {
    for (const Sample& x : samples_before_ionisation(rec)) {
      e.push_back(x.E);
      eps.push_back(x.eps);
      r.push_back(x.r);
    }
  }
  if (e.empty()) throw std::invalid_argument("pool_histograms: no samples before ionisation");
  PooledHistograms h;
  h.energy = histogram_compare(e, pdf_E, cdf_E, -2.0, 0.0, bins);
  h.eccentricity = histogram_compare(eps, pdf_eps, cdf_eps, 0.0, 1.0, bins);
  h.radius = histogram_compare(r, pdf_r, cdf_r, 0.0, 8.0, bins);
  return h;
}

namespace {

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string record_bytes(const TrajectoryRecord& rec, RecordFormat format) {
  std::ostringstream ss;
  if (format == RecordFormat::binary) {
    write_record_binary(ss, rec);
  } else {
    write_record_csv(ss, rec);
  }
  return ss.str();
}

std::string checkpoint_bytes(const CheckpointFile& file) {
  std::ostringstream ss;
  write_checkpoint(ss, file);
  return ss.str();
}

void log_line(const EnsembleOptions& opt, const std::string& line) {
  if (!opt.log) return;
#pragma omp critical(sedsim_log)
  *opt.log << line << '\n' << std::flush;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Chunked vs serial sum of the E terms over the start window; the first
// harmonic band is [1, 1.5 k^3 N].
std::string audit_line(const PreparedTrajectory& p) {
  const OrbitElements el = orbit_elements(p.setup.start.r, p.setup.start.v);
  const ModeRange band = p.window.full_band();
  const std::vector<Vec3> terms = field_terms(*p.field, band, p.setup.t0, kFieldE);
  std::size_t first = terms.size();
  if (el.bound()) {
    const double k = orbital_wavenumber(el.E);
    first = static_cast<std::size_t>(
        std::llround(1.5 * k * k * k * static_cast<double>(p.field->grid().mesh_density)));
  }
  const PrecisionAudit a = precision_audit(terms, p.setup.plan, first);
  return "audit trajectory " + std::to_string(p.index) + ": modes " +
         std::to_string(terms.size()) + fmt(" relative %.3e", a.relative_discrepancy) +
         fmt(" first-harmonic ratio %.3e", a.harmonic_ratio);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

std::string index_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(index));
  return buf;
}

}  // namespace

void write_histograms(const std::string& dir, const PooledHistograms& h) {
  ensure_dir(dir);
  auto one = [&](const char* name, const HistogramReport& rep) {
    std::ostringstream ss;
    write_histogram_csv(ss, name, rep);
    write_file_atomic(fs::path(dir) / (std::string(name) + ".csv"), ss.str());
  };
  one("energy", h.energy);
  one("eccentricity", h.eccentricity);
  one("radius", h.radius);
}

int ensemble_exit_code(const std::vector<TrajectoryRecord>& records) {
  bool all_ionised = !records.empty();
  for (const TrajectoryRecord& r : records) {
    if (r.aborted) return kExitAbort;
    if (!r.ionisation_time) all_ionised = false;
  }
  return all_ionised ? kExitAllIonised : kExitOk;
}

std::string record_path(const RunConfig& config, std::uint64_t index) {
  const char* ext = config.record_format == RecordFormat::binary ? ".bin" : ".csv";
  return (fs::path(config.output_dir) / ("trajectory_" + index_name(index) + ext)).string();
}

std::string checkpoint_path(const RunConfig& config, std::uint64_t index) {
  return (fs::path(config.output_dir) / ("trajectory_" + index_name(index) + ".ckpt")).string();
}

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries) {
  out << "index,t_total,t_total_seconds,t_damp,n_orbit_nominal,n_orbit_actual,n_damp,"
         "ionisation_time,aborted\n";
  char buf[512];
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const RunSummary& s = summaries[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%llu,%.17g,", i, s.t_total,
                  s.t_total_seconds, s.t_damp, s.n_orbit_nominal,
                  static_cast<unsigned long long>(s.n_orbit_actual), s.n_damp);
    out << buf;
    if (s.ionisation_time) {
      std::snprintf(buf, sizeof buf, "%.17g", *s.ionisation_time);
      out << buf;
    } else {
      out << "none";
    }
    out << ',' << (s.aborted ? 1 : 0) << '\n';
  }
}

EnsembleResult run_ensemble(const RunConfig& config, const EnsembleOptions& options) {
  if (config.ensemble_size == 0) throw std::invalid_argument("ensemble_size: must be >= 1");
  const std::uint64_t n = config.ensemble_size;
  EnsembleResult result;
  result.records.resize(n);
  result.summaries.resize(n);
  std::vector<std::string> errors(n);
  const std::string config_text = emit_config(config);
  if (options.write_files) {
    ensure_dir(config.output_dir);
    write_file_atomic(fs::path(config.output_dir) / "config.txt", config_text);
  }
  const PhysicalConstants constants = config.constants();

#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const PreparedTrajectory p = prepare_trajectory(config, i);
      if (p.field) log_line(options, audit_line(p));
      TrajectoryRunner runner(p.setup, p.field, p.window);
      std::function<void(const TrajectoryCheckpoint&)> on_ckpt;
      if (options.write_files && config.checkpoint_every > 0) {
        on_ckpt = [&](const TrajectoryCheckpoint& c) {
          write_file_atomic(checkpoint_path(config, i),
                            checkpoint_bytes({config_text, i, p.seeds.trajectory, c}));
        };
      }
      runner.run(config.checkpoint_every, on_ckpt);
      result.records[i] = runner.record();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
    result.summaries[i] = summarize(result.records[i], constants);
    if (options.write_files && errors[i].empty()) {
      try {
        write_file_atomic(record_path(config, i),
                          record_bytes(result.records[i], config.record_format));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (errors[i].empty()) {
      const TrajectoryRecord& r = result.records[i];
      log_line(options, "trajectory " + std::to_string(i) + ": " + std::to_string(r.steps) +
                            " steps, " + std::to_string(r.passages) + " passages" +
                            (r.ionisation_time ? fmt(", ionised at t = %.6g", *r.ionisation_time)
                                               : std::string()) +
                            (r.aborted ? ", aborted: " + r.abort_message : std::string()) +
                            fmt(" (%.2f s)", secs));
    } else {
      log_line(options, "trajectory " + std::to_string(i) + " failed: " + errors[i]);
    }
  }

  std::vector<TrajectoryRecord> ok;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      result.failures.push_back("trajectory " + std::to_string(i) + ": " + errors[i]);
    } else {
      ok.push_back(result.records[i]);
    }
  }
  if (!ok.empty()) {
    try {
      result.histograms = pool_histograms(ok, config.histogram_bins);
    } catch (const std::invalid_argument&) {
      // every record was cut before its first sample
    }
  }
  if (options.write_files) {
    if (result.histograms) write_histograms(config.output_dir, *result.histograms);
    std::ostringstream ss;
    write_summary_csv(ss, result.summaries);
    write_file_atomic(fs::path(config.output_dir) / "summary.csv", ss.str());
  }
  result.exit_code = ensemble_exit_code(ok);
  if (!result.failures.empty() && result.exit_code == kExitOk) result.exit_code = kExitAbort;
  return result;
}

ResumeResult resume_trajectory(const std::string& path, const EnsembleOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const CheckpointFile file = read_checkpoint(in);
  ResumeResult out;
  out.config = parse_config(file.config_text);
  out.index = file.trajectory_index;
  const PreparedTrajectory p =
      prepare_trajectory_with_key(out.config, file.trajectory_index, file.trajectory_seed);
  TrajectoryRunner runner(p.setup, p.field, file.checkpoint);
  std::function<void(const TrajectoryCheckpoint&)> on_ckpt;
  if (options.write_files && out.config.checkpoint_every > 0) {
    on_ckpt = [&](const TrajectoryCheckpoint& c) {
      write_file_atomic(checkpoint_path(out.config, out.index),
                        checkpoint_bytes({file.config_text, out.index, file.trajectory_seed, c}));
    };
  }
  runner.run(out.config.checkpoint_every, on_ckpt);
  out.record = runner.record();
  out.summary = summarize(out.record, out.config.constants());
  if (options.write_files) {
    ensure_dir(out.config.output_dir);
    write_file_atomic(record_path(out.config, out.index),
                      record_bytes(out.record, out.config.record_format));
  }
  log_line(options, "resumed trajectory " + std::to_string(out.index) + ": " +
                        std::to_string(out.record.steps) + " steps, " +
                        std::to_string(out.record.passages) + " passages");
  out.exit_code = ensemble_exit_code({out.record});
  return out;
}

}  // namespace sedsim
