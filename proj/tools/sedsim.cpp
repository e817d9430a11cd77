// sedsim: command-line front end.
//
//   sedsim run <config>               run an ensemble
//   sedsim resume <checkpoint>        continue one trajectory
//   sedsim sample                     sampler-only self-test against the conjecture
//   sedsim field-check                field correlation acceptance
//   sedsim analyze <records...>       re-histogram stored records
//   sedsim spectrum <config>          dump one trajectory's field spectrum
//
// Exit codes: 0 success, 1 usage or configuration error, 2 every trajectory
// ionised, 3 numerical abort or failed trajectory, 4 a self-test failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sedsim/config.hpp"
#include "sedsim/conjecture.hpp"
#include "sedsim/ensemble.hpp"
#include "sedsim/field_check.hpp"
#include "sedsim/record_io.hpp"

namespace {

using namespace sedsim;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) {
  try {
    return parse_config(read_text(path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void print_summary(const std::vector<RunSummary>& summaries) {
  std::printf("%6s %14s %12s %14s %10s %10s %12s\n", "index", "t_total", "seconds", "N_orbit",
              "actual", "N_damp", "ionised_at");
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const RunSummary& s = summaries[i];
    std::printf("%6zu %14.6g %12.4g %14.6g %10llu %10.4g ", i, s.t_total, s.t_total_seconds,
                s.n_orbit_nominal, static_cast<unsigned long long>(s.n_orbit_actual), s.n_damp);
    if (s.ionisation_time) {
      std::printf("%12.6g", *s.ionisation_time);
    } else {
      std::printf("%12s", s.aborted ? "aborted" : "-");
    }
    std::printf("\n");
  }
}

void print_ks(const char* name, const HistogramReport& h) {
  std::printf("%-14s n=%zu ks=%.5f critical(1%%)=%.5f %s\n", name, h.n_total, h.ks,
              h.ks_critical, h.ks < h.ks_critical ? "pass" : "FAIL");
}

int cmd_run(const std::string& path, const std::string& out_dir, bool quiet) {
  RunConfig cfg = load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  EnsembleOptions opt;
  opt.log = quiet ? nullptr : &std::cerr;
  const EnsembleResult res = run_ensemble(cfg, opt);
  for (const std::string& f : res.failures) std::cerr << "error: " << f << '\n';
  if (!quiet) print_summary(res.summaries);
  return res.exit_code;
}

int cmd_resume(const std::string& path, bool quiet) {
  EnsembleOptions opt;
  opt.log = quiet ? nullptr : &std::cerr;
  const ResumeResult res = resume_trajectory(path, opt);
  if (!quiet) print_summary({res.summary});
  return res.exit_code;
}

int cmd_sample(std::uint64_t n, std::uint64_t seed, std::size_t bins, const std::string& out_dir) {
  if (n == 0) throw UsageError("--n must be positive");
  CounterRng rng(derive_seed(seed, 1));
  std::vector<double> R(n), kappa(n), E(n), eps(n), r(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const InitialCondition ic = sample_initial_conditions(rng);
    R[i] = ic.R;
    kappa[i] = ic.kappa;
    E[i] = ic.E;
    eps[i] = ic.eps;
    r[i] = norm(ic.point.r);
  }
  const HistogramReport hR = histogram_compare(R, pdf_R, cdf_R, 0.0, 10.0, bins);
  const HistogramReport hk = histogram_compare(kappa, pdf_kappa, cdf_kappa, 0.0, 1.0, bins);
  PooledHistograms pooled;
  pooled.energy = histogram_compare(E, pdf_E, cdf_E, -2.0, 0.0, bins);
  pooled.eccentricity = histogram_compare(eps, pdf_eps, cdf_eps, 0.0, 1.0, bins);
  // Start radii sit at perihelion or aphelion, so r is reported but not tested.
  pooled.radius = histogram_compare(r, pdf_r, nullptr, 0.0, 8.0, bins);
  print_ks("R", hR);
  print_ks("kappa", hk);
  print_ks("E", pooled.energy);
  print_ks("eps", pooled.eccentricity);
  double mean_R = 0.0;
  for (double x : R) mean_R += x;
  mean_R /= static_cast<double>(n);
  std::printf("mean R = %.6f (target 2.5)\n", mean_R);
  if (!out_dir.empty()) {
    write_histograms(out_dir, pooled);
    std::ofstream out(std::filesystem::path(out_dir) / "R.csv");
    write_histogram_csv(out, "R", hR);
    std::ofstream outk(std::filesystem::path(out_dir) / "kappa.csv");
    write_histogram_csv(outk, "kappa", hk);
  }
  const bool ok = hR.ks < hR.ks_critical && hk.ks < hk.ks_critical &&
                  pooled.energy.ks < pooled.energy.ks_critical &&
                  pooled.eccentricity.ks < pooled.eccentricity.ks_critical;
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_field_check(const CorrelationCheckConfig& cfg) {
  const CorrelationReport rep = correlation_check(cfg);
  std::printf("%8s %14s %14s %9s %14s %14s %9s\n", "t", "C_EE", "theory", "rel", "C_AA", "theory",
              "rel");
  for (const CorrelationLag& x : rep.lags) {
    std::printf("%8.3g %14.6e %14.6e %9.3e %14.6e %14.6e %9.3e\n", x.t, x.ee, x.ee_theory, x.ee_rel,
                x.aa, x.aa_theory, x.aa_rel);
  }
  std::printf("%s in %.1f s (tolerance %.3g)\n", rep.pass ? "pass" : "FAIL", rep.seconds,
              cfg.tolerance);
  return rep.pass ? kExitOk : kExitCheckFailed;
}

int cmd_analyze(const std::vector<std::string>& files, const std::string& config_path,
                std::size_t bins, const std::string& out_dir) {
  std::vector<TrajectoryRecord> records;
  for (const std::string& f : files) records.push_back(read_record_file(f));
  PhysicalConstants c = PhysicalConstants::from_charge(1);
  if (!config_path.empty()) {
    const RunConfig cfg = load_config(config_path);
    c = cfg.constants();
    if (bins == 0) bins = cfg.histogram_bins;
  }
  if (bins == 0) bins = 50;
  std::vector<RunSummary> summaries;
  for (const TrajectoryRecord& r : records) summaries.push_back(summarize(r, c));
  print_summary(summaries);
  const PooledHistograms h = pool_histograms(records, bins);
  print_ks("E", h.energy);
  print_ks("eps", h.eccentricity);
  print_ks("r", h.radius);
  if (!out_dir.empty()) write_histograms(out_dir, h);
  return ensemble_exit_code(records);
}

int cmd_spectrum(const std::string& path, std::uint64_t index, const std::string& out_path) {
  const RunConfig cfg = load_config(path);
  if (!cfg.field_on) throw UsageError("spectrum: the configuration has field = off");
  const PreparedTrajectory p = prepare_trajectory(cfg, index);
  if (out_path.empty() || out_path == "-") {
    write_spectrum(std::cout, *p.field);
  } else {
    std::ofstream out(out_path);
    if (!out) throw UsageError("cannot write " + out_path);
    write_spectrum(out, *p.field);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic electrodynamics hydrogen-like atom simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt_path, out_path;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run the ensemble described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output-dir", out_dir, "Override output_dir");
  run->add_flag("-q,--quiet", quiet, "No progress log or summary table");

  auto* resume = app.add_subcommand("resume", "Continue a trajectory from its checkpoint");
  resume->add_option("checkpoint", ckpt_path, "Checkpoint file")->required();
  resume->add_flag("-q,--quiet", quiet, "No progress log or summary table");

  std::uint64_t n_samples = 100000, seed = 1;
  std::size_t bins = 50;
  auto* sample = app.add_subcommand("sample", "Sampler-only self-test against the conjecture");
  sample->add_option("-n,--n", n_samples, "Number of draws")->capture_default_str();
  sample->add_option("-s,--seed", seed, "Master seed")->capture_default_str();
  sample->add_option("-b,--bins", bins, "Histogram bins")->capture_default_str();
  sample->add_option("-o,--output-dir", out_dir, "Write histograms here");

  CorrelationCheckConfig cc;
  auto* fcheck = app.add_subcommand("field-check", "Field two-point correlation acceptance");
  fcheck->add_option("--N", cc.N, "Mesh density")->capture_default_str();
  fcheck->add_option("--max-mode", cc.max_mode, "Largest mode")->capture_default_str();
  fcheck->add_option("--seeds", cc.seeds, "Realizations")->capture_default_str();
  fcheck->add_option("--origins", cc.origins, "Time origins per realization")->capture_default_str();
  fcheck->add_option("--cutoff-scale", cc.cutoff_scale, "Cutoff scale s")->capture_default_str();
  fcheck->add_option("--lags", cc.lags, "Lag times")->capture_default_str();
  fcheck->add_option("--seed", cc.master_seed, "Master seed")->capture_default_str();
  fcheck->add_option("--tolerance", cc.tolerance, "Relative tolerance")->capture_default_str();

  std::vector<std::string> record_files;
  std::size_t analyze_bins = 0;
  auto* analyze = app.add_subcommand("analyze", "Re-histogram stored trajectory records");
  analyze->add_option("records", record_files, "Record files (.csv or .bin)")->required();
  analyze->add_option("-c,--config", config_path, "Config of the run (constants, bins)");
  analyze->add_option("-b,--bins", analyze_bins, "Histogram bins");
  analyze->add_option("-o,--output-dir", out_dir, "Write histograms here");

  std::uint64_t index = 0;
  auto* spectrum = app.add_subcommand("spectrum", "Dump the field spectrum of one trajectory");
  spectrum->add_option("config", config_path, "Config file")->required();
  spectrum->add_option("-i,--index", index, "Trajectory index")->capture_default_str();
  spectrum->add_option("-o,--output", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, quiet);
    if (*resume) return cmd_resume(ckpt_path, quiet);
    if (*sample) return cmd_sample(n_samples, seed, bins, out_dir);
    if (*fcheck) return cmd_field_check(cc);
    if (*analyze) return cmd_analyze(record_files, config_path, analyze_bins, out_dir);
    if (*spectrum) return cmd_spectrum(config_path, index, out_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAbort;
  }
  return kExitUsage;
}
