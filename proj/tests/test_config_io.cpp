#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "sedsim/config.hpp"
#include "sedsim/record_io.hpp"

using namespace sedsim;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

TrajectoryRecord sample_record() {
  TrajectoryRecord r;
  for (int i = 0; i < 5; ++i) {
    r.samples.push_back({0.1 * i + 1.0 / 3.0, -0.5 - 1e-17 * i, 1.0 / 7.0, 0.25, 2.0 / 3.0,
                         static_cast<std::uint32_t>(i % 3)});
  }
  r.events.push_back({EventKind::push, 0.3, -1.7, -1.6, 0, 0, 0, 0});
  r.events.push_back({EventKind::window_switch, 0.4, 1e-13, 2e-12, 0, 2500, 0, 3000});
  r.ionisation_time = 12345.678901234567;
  r.aborted = true;
  r.abort_message = "guard radius reached, r = 0.0009";
  r.passages = 17;
  r.steps = 68000;
  r.t_end = 106.81415022205297;
  r.max_linear_shift = 3.5e-9;
  return r;
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig c = parse_config("Z = 3\nN = 1500000\nn_harm = 2.5\nseed = 1\n");
  CHECK(c.Z == 3);
  CHECK(c.N == 1500000);
  CHECK(c.seed == 1);
  CHECK(c.formulation == Formulation::s_form);
  CHECK(c.integrator.cutoff == CutoffPolicy::moving);
  CHECK(c.integrator.steps_per_orbit == 4000);
  CHECK(c.integrator.energy_floor == -1.6);
  CHECK(c.integrator.ionisation_threshold == -0.05);
  CHECK(c.integrator.ionisation_dwell == 1e7);
  CHECK(c.integrator.switch_increment == 0.2);
  CHECK(c.plan.chunk_size == 256);
  CHECK(c.ensemble_size == 1);
  CHECK(c.record_format == RecordFormat::csv);
  CHECK(c.constants().beta == doctest::Approx(std::sqrt(2.0 / 3.0) * 3 * std::pow(kFineStructure, 1.5)));
  // Largest moving window: 2.5 harmonics at the energy floor.
  CHECK(c.grid().max_mode ==
        static_cast<std::size_t>(std::ceil(2.5 * std::pow(3.2, 1.5) * 1.5e6)) + 1);
}

TEST_CASE("config errors name the key") {
  CHECK(error_of("Z = 0\nN = 10\nn_harm = 2\nseed = 1\n").rfind("Z", 0) == 0);
  CHECK(error_of("N = 10\nn_harm = 2\nseed = 1\n").rfind("Z", 0) == 0);
  CHECK(error_of("Z = 1\nN = 10\nseed = 1\n").rfind("n_harm", 0) == 0);
  CHECK(error_of("Z = 1\nN = 10\nn_harm = 2\nseed = 1\ncolour = red\n").find("colour") !=
        std::string::npos);
  CHECK(error_of("Z = 1\nN = 10\nn_harm = 2\nseed = 1\nseed = 2\n").find("seed") !=
        std::string::npos);
  CHECK(error_of("Z = 1\nN = 10\nn_harm = 2\nseed = 1\nsteps_per_orbit = -4\n")
            .rfind("steps_per_orbit", 0) == 0);
  CHECK(error_of("Z = 1\nN = 10\nn_harm = 2\nseed = 1\nfield_sampling = psychic\n")
            .rfind("field_sampling", 0) == 0);
  CHECK(error_of("Z = 1\nN = 10\nn_harm = 2\nseed = 1\nZ = 2\n").find("Z") != std::string::npos);
  // Fixed cutoff needs no n_harm.
  CHECK(error_of("Z = 1\nN = 100\ncutoff = fixed\nseed = 1\n").empty());
}

TEST_CASE("config round trip") {
  RunConfig c = parse_config(
      "# comment\nZ = 2\nN = 20000\nseed = 99\ncutoff = fixed\nformulation = mixed\n"
      "beta = 0.001\ncutoff_scale = 1e-4\nfield_sampling = tabulated\nrecord_format = binary\n"
      "initial = explicit\ninitial_r = 1, 0.5, 0\ninitial_v = 0, 1, 0.25\n");
  CHECK(c.initial == InitialSource::explicit_state);
  CHECK(c.initial_r == Vec3{1, 0.5, 0});
  const RunConfig back = parse_config(emit_config(c));
  CHECK(back == c);
  CHECK(emit_config(back) == emit_config(c));
}

TEST_CASE("record CSV round trip is exact") {
  const TrajectoryRecord r = sample_record();
  std::stringstream s;
  write_record_csv(s, r);
  CHECK(s.str().rfind("# sedsim trajectory record v1", 0) == 0);
  CHECK(read_record_csv(s) == r);

  TrajectoryRecord plain;
  plain.samples.push_back({0, -0.5, 1, 0, 2, 0});
  std::stringstream p;
  write_record_csv(p, plain);
  CHECK(read_record_csv(p) == plain);
}

TEST_CASE("record binary round trip is exact") {
  const TrajectoryRecord r = sample_record();
  std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
  write_record_binary(s, r);
  const std::string bytes = s.str();
  CHECK(bytes.substr(0, 8) == "SEDREC01");
  CHECK(read_record_binary(s) == r);

  std::stringstream cut(bytes.substr(0, bytes.size() - 7));
  CHECK_THROWS_AS(read_record_binary(cut), FormatError);
  std::stringstream bad("NOTAREC!");
  CHECK_THROWS_AS(read_record_binary(bad), FormatError);
}

TEST_CASE("checkpoint round trip is exact") {
  CheckpointFile f;
  f.config_text = "Z = 1\nN = 10\n";
  f.trajectory_index = 3;
  f.trajectory_seed = 0xdeadbeefcafef00dULL;
  TrajectoryCheckpoint& k = f.checkpoint;
  k.state = {Formulation::mixed, {1, 2, 3}, {0.1, 0.2, 0.3}, 55.5};
  k.window.n_low = 10;
  k.window.n_high = 40;
  k.window.delta_A = {1e-3, 2e-3, 3e-3};
  k.window.delta_C = {-1e-3, 0, 1};
  k.window.delta_A_moment = {0.5, 0.25, 0.125};
  k.window.switch_log.push_back({12.0, 0, 30, 10, 40, {1, 2, 3}, {4, 5, 6}});
  k.field_now = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}};
  k.dt = 1.0 / 3000.0;
  k.anchor = 55.0;
  k.k3_ref = 1.2;
  k.swept_angle = 3.7;
  k.last_r = {0.9, 0.1, 0};
  k.rng_counter = 17;
  k.pending_flags = kFlagPush;
  k.ion_run_start = 44.0;
  k.record = sample_record();

  std::stringstream s;
  write_checkpoint(s, f);
  const CheckpointFile g = read_checkpoint(s);
  CHECK(g.config_text == f.config_text);
  CHECK(g.trajectory_index == 3);
  CHECK(g.trajectory_seed == f.trajectory_seed);
  CHECK(g.checkpoint.state.form == Formulation::mixed);
  CHECK(g.checkpoint.state.x == k.state.x);
  CHECK(g.checkpoint.state.t == k.state.t);
  CHECK(g.checkpoint.window.switch_log.size() == 1);
  CHECK(g.checkpoint.window.switch_log[0].mismatch_c == Vec3{4, 5, 6});
  CHECK(g.checkpoint.window.delta_A_moment == k.window.delta_A_moment);
  CHECK(g.checkpoint.field_now.a_high == Vec3{10, 11, 12});
  CHECK(g.checkpoint.dt == k.dt);
  CHECK(g.checkpoint.rng_counter == 17);
  CHECK(g.checkpoint.ion_run_start == 44.0);
  CHECK(g.checkpoint.record == k.record);

  const std::string bytes = s.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(cut), FormatError);
}

TEST_CASE("histogram CSV") {
  const std::vector<double> xs{0.1, 0.2, 0.2, 0.7, 1.5};
  const HistogramReport h = histogram_compare(
      xs, [](double) { return 1.0; }, [](double x) { return std::min(1.0, x); }, 0.0, 1.0, 4);
  CHECK(h.n_total == 5);
  CHECK(h.n_in_range == 4);
  std::ostringstream o;
  write_histogram_csv(o, "energy", h);
  const std::string text = o.str();
  CHECK(text.find("# quantity=energy") != std::string::npos);
  CHECK(text.find("bin_lo,bin_hi,count,height,pdf") != std::string::npos);
  double area = 0.0;
  for (std::size_t i = 0; i < 4; ++i) area += h.heights[i] * 0.25;
  CHECK(std::abs(area - 1.0) < 1e-12);
}
