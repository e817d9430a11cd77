#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "sedsim/ensemble.hpp"
#include "sedsim/record_io.hpp"

using namespace sedsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sedsim_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_config(const std::string& extra = {}) {
  return parse_config(
      "Z = 1\nN = 200\nseed = 7\ncutoff = fixed\nmax_orbits = 20\nt_max = 1e6\n"
      "steps_per_orbit = 800\nsample_stride = 100\nensemble_size = 2\n" +
      extra);
}

}  // namespace

TEST_CASE("trajectory seeds") {
  const TrajectorySeeds s = trajectory_seeds(5, 3);
  CHECK(s.trajectory == derive_seed(5, 3));
  CHECK(s.field == derive_seed(s.trajectory, 0));
  CHECK(s.initial == derive_seed(s.trajectory, 1));
  CHECK(s.push == derive_seed(s.trajectory, 2));
  const TrajectorySeeds k = seeds_from_trajectory_key(s.trajectory);
  CHECK(k.field == s.field);
  CHECK(trajectory_seeds(5, 4).field != s.field);
}

TEST_CASE("summary of a run") {
  TrajectoryRecord r;
  r.samples.push_back({0.0, -0.5, 1, 0, 1, 0});
  r.samples.push_back({1.0e7, -0.5, 1, 0, 1, 0});
  r.t_end = 1.2e7;
  r.passages = 1900000;
  const PhysicalConstants c = PhysicalConstants::from_charge(3);
  const RunSummary s = summarize(r, c);
  CHECK(s.t_total == 1.2e7);
  CHECK(s.t_total_seconds == doctest::Approx(3.2e-11).epsilon(0.01));
  CHECK(s.n_orbit_nominal == doctest::Approx(1.2e7 / (2 * std::numbers::pi)));
  CHECK(s.n_orbit_actual == 1900000);
  CHECK(s.n_damp == doctest::Approx(1.2e7 * c.beta * c.beta));

  const RunSummary empty = summarize(TrajectoryRecord{}, c);
  CHECK(empty.t_total == 0.0);
  CHECK(empty.n_orbit_actual == 0);
  CHECK_FALSE(empty.ionisation_time);
}

TEST_CASE("samples before ionisation") {
  TrajectoryRecord r;
  for (int i = 0; i < 10; ++i) r.samples.push_back({double(i), -0.5, 1, 0, 1, 0});
  CHECK(samples_before_ionisation(r).size() == 10);
  r.ionisation_time = 6.0;
  CHECK(samples_before_ionisation(r).size() == 6);
  CHECK_THROWS_AS(pool_histograms({}, 10), std::invalid_argument);
}

TEST_CASE("exit codes") {
  TrajectoryRecord ok, ion, bad;
  ion.ionisation_time = 1.0;
  bad.aborted = true;
  CHECK(ensemble_exit_code({ok, ion}) == kExitOk);
  CHECK(ensemble_exit_code({ion, ion}) == kExitAllIonised);
  CHECK(ensemble_exit_code({ion, bad}) == kExitAbort);
}

TEST_CASE("Kepler ensemble without the field conserves energy") {
  RunConfig c = small_config("field = off\nbeta = 0\n");
  EnsembleOptions opt;
  opt.write_files = false;
  const EnsembleResult res = run_ensemble(c, opt);
  REQUIRE(res.records.size() == 2);
  REQUIRE(res.failures.empty());
  CHECK(res.exit_code == kExitOk);
  for (const TrajectoryRecord& r : res.records) {
    CHECK(r.passages >= 19);
    const double E0 = r.samples.front().E;
    for (const Sample& s : r.samples) CHECK(std::abs(s.E - E0) < 1e-4 * std::abs(E0));
  }
  REQUIRE(res.histograms);
  // Each trajectory contributes one energy; the histogram has at most two occupied bins.
  int occupied = 0;
  for (auto n : res.histograms->energy.counts) occupied += n > 0;
  CHECK(occupied <= 2);
}

TEST_CASE("same key gives identical records; files are written") {
  const fs::path dir = scratch_dir("files");
  RunConfig c = small_config("record_format = binary\ncheckpoint_every = 4000\n");
  c.output_dir = dir.string();
  const EnsembleResult a = run_ensemble(c);
  CHECK(a.failures.empty());
  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "energy.csv"));
  CHECK(fs::exists(record_path(c, 0)));
  CHECK(fs::exists(checkpoint_path(c, 1)));
  CHECK(read_record_file(record_path(c, 1)) == a.records[1]);

  EnsembleOptions quiet;
  quiet.write_files = false;
  const EnsembleResult b = run_ensemble(c, quiet);
  CHECK(a.records == b.records);

  const PreparedTrajectory p = prepare_trajectory(c, 1);
  CHECK(p.seeds.trajectory == derive_seed(7, 1));
  CHECK(run_trajectory(p.setup, p.field, p.window) == a.records[1]);
  fs::remove_all(dir);
}

TEST_CASE("resume reproduces the uninterrupted record") {
  const fs::path dir = scratch_dir("resume");
  RunConfig c = small_config();
  c.ensemble_size = 1;
  c.max_orbits = 12;
  c.output_dir = dir.string();
  EnsembleOptions quiet;
  quiet.write_files = false;
  const TrajectoryRecord full = run_ensemble(c, quiet).records.at(0);

  // Stop a runner part way, save its checkpoint, resume from the file.
  const PreparedTrajectory p = prepare_trajectory(c, 0);
  TrajectoryRunner runner(p.setup, p.field, p.window);
  for (int i = 0; i < 3000 && !runner.finished(); ++i) runner.step();
  fs::create_directories(dir);
  CheckpointFile f{emit_config(c), 0, p.seeds.trajectory, runner.checkpoint()};
  const fs::path ck = dir / "mid.ckpt";
  {
    std::ofstream out(ck, std::ios::binary);
    write_checkpoint(out, f);
  }
  const ResumeResult r = resume_trajectory(ck.string(), quiet);
  CHECK(r.index == 0);
  CHECK(r.record == full);
  fs::remove_all(dir);
}
