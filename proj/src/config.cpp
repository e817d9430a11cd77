#include "sedsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sedsim {

namespace {

[[noreturn]] void key_error(std::string_view key, const std::string& what) {
  throw std::invalid_argument(std::string(key) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    key_error(key, "expected a finite number, got '" + std::string(v) + "'");
  }
  return x;
}

/// Integers may be written in floating notation (N = 1.5e6).
std::int64_t to_integer(std::string_view key, std::string_view v) {
  std::int64_t n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec == std::errc() && ptr == v.data() + v.size()) return n;
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 9.0e18) {
    key_error(key, "expected an integer, got '" + std::string(v) + "'");
  }
  return static_cast<std::int64_t>(x);
}

std::uint64_t to_unsigned(std::string_view key, std::string_view v) {
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec == std::errc() && ptr == v.data() + v.size()) return n;
  const std::int64_t i = to_integer(key, v);
  if (i < 0) key_error(key, "must be non-negative");
  return static_cast<std::uint64_t>(i);
}

Vec3 to_vec3(std::string_view key, std::string_view v) {
  Vec3 out;
  int k = 0;
  std::size_t pos = 0;
  while (k < 3) {
    const auto comma = v.find(',', pos);
    const std::string_view part = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
    out[k++] = to_double(key, part);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (k != 3 || v.find(',', pos) != std::string_view::npos) {
    key_error(key, "expected three comma-separated numbers");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on") return true;
  if (v == "false" || v == "off") return false;
  key_error(key, "expected true/false or on/off, got '" + std::string(v) + "'");
}

std::string fmt(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt(const Vec3& v) { return fmt(v.x) + ", " + fmt(v.y) + ", " + fmt(v.z); }

class KeyValues {
 public:
  explicit KeyValues(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
      if (value.empty()) key_error(key, "empty value");
      if (!values_.emplace(key, value).second) key_error(key, "duplicate key");
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  void reject_leftovers() const {
    if (!values_.empty()) key_error(values_.begin()->first, "unknown key");
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string_view to_string(RecordFormat f) { return f == RecordFormat::csv ? "csv" : "binary"; }
std::string_view to_string(FieldSampling s) {
  switch (s) {
    case FieldSampling::interpolated: return "interpolated";
    case FieldSampling::exact: return "exact";
    case FieldSampling::tabulated: return "tabulated";
  }
  return "?";
}

std::string_view to_string(CutoffPolicy p) { return p == CutoffPolicy::moving ? "moving" : "fixed"; }

RunConfig::RunConfig() { integrator.cutoff = CutoffPolicy::moving; }

PhysicalConstants RunConfig::constants() const {
  PhysicalConstants c = PhysicalConstants::from_charge(Z, alpha);
  if (beta) c = c.with_beta(*beta);
  return c;
}

FrequencyGrid RunConfig::grid() const {
  FrequencyGrid g;
  g.mesh_density = N;
  if (max_mode > 0) {
    g.max_mode = max_mode;
  } else if (integrator.cutoff == CutoffPolicy::fixed) {
    g.max_mode = n_high.value_or(fixed_window_bounds(formulation, FrequencyGrid{N, 1}).second);
  } else {
    // Largest window: orbital frequency at the energy floor.
    const double k3 = std::pow(-2.0 * integrator.energy_floor, 1.5);
    const double harm = integrator.n_harm + (formulation == Formulation::mixed ? 0.5 : 0.0);
    g.max_mode = static_cast<std::size_t>(std::ceil(harm * k3 * static_cast<double>(N))) + 1;
  }
  return g;
}

FieldWindow RunConfig::initial_window(double E0) const {
  const FrequencyGrid g = grid();
  if (integrator.cutoff == CutoffPolicy::fixed) {
    const auto [lo, hi] = fixed_window_bounds(formulation, g);
    return make_window(g, n_low.value_or(lo), n_high.value_or(hi));
  }
  const double E = std::clamp(E0, integrator.energy_floor, integrator.ionisation_threshold);
  const double k = orbital_wavenumber(E);
  const auto [lo, hi] = moving_window_bounds(k * k * k, formulation, g, integrator.n_harm);
  return make_window(g, lo, hi);
}

RunConfig parse_config(std::string_view text) {
  KeyValues kv(text);
  RunConfig c;

  auto req = [&](const char* key) {
    auto v = kv.take(key);
    if (!v) key_error(key, "required key missing");
    return *v;
  };

  {
    const std::string v = req("Z");
    const std::int64_t z = to_integer("Z", v);
    if (z < 1 || z > 137) key_error("Z", "must be an integer in [1, 137]");
    c.Z = static_cast<int>(z);
  }
  {
    const std::string v = req("N");
    c.N = to_integer("N", v);
    if (c.N < 1) key_error("N", "must be a positive integer");
  }
  c.seed = to_unsigned("seed", req("seed"));

  if (auto v = kv.take("alpha")) {
    c.alpha = to_double("alpha", *v);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) key_error("alpha", "must lie in (0, 1)");
  }
  if (auto v = kv.take("beta")) {
    c.beta = to_double("beta", *v);
    if (*c.beta < 0.0) key_error("beta", "must be >= 0");
  }
  if (auto v = kv.take("cutoff_scale")) {
    c.cutoff_scale = to_double("cutoff_scale", *v);
    if (*c.cutoff_scale < 0.0) key_error("cutoff_scale", "must be >= 0");
  }
  if (auto v = kv.take("max_mode")) c.max_mode = to_unsigned("max_mode", *v);
  if (auto v = kv.take("formulation")) {
    try {
      c.formulation = parse_formulation(*v);
    } catch (const std::invalid_argument& e) {
      key_error("formulation", e.what());
    }
  }
  if (auto v = kv.take("cutoff")) {
    if (*v == "moving") {
      c.integrator.cutoff = CutoffPolicy::moving;
    } else if (*v == "fixed") {
      c.integrator.cutoff = CutoffPolicy::fixed;
    } else {
      key_error("cutoff", "expected moving or fixed");
    }
  }
  if (auto v = kv.take("n_harm")) {
    c.integrator.n_harm = to_double("n_harm", *v);
    if (!(c.integrator.n_harm > 0.0)) key_error("n_harm", "must be positive");
  } else if (c.integrator.cutoff == CutoffPolicy::moving) {
    key_error("n_harm", "required key missing (cutoff = moving)");
  }
  if (auto v = kv.take("switch_increment")) c.integrator.switch_increment = to_double("switch_increment", *v);
  if (auto v = kv.take("n_low")) c.n_low = to_unsigned("n_low", *v);
  if (auto v = kv.take("n_high")) c.n_high = to_unsigned("n_high", *v);
  if (auto v = kv.take("steps_per_orbit")) {
    c.integrator.steps_per_orbit = static_cast<int>(to_integer("steps_per_orbit", *v));
  }
  if (auto v = kv.take("field_refreshes_per_max_period")) {
    c.integrator.field_refreshes_per_max_period =
        static_cast<int>(to_integer("field_refreshes_per_max_period", *v));
  }
  if (auto v = kv.take("interpolation_order")) {
    c.integrator.interpolation_order = static_cast<int>(to_integer("interpolation_order", *v));
  }
  if (auto v = kv.take("energy_floor")) c.integrator.energy_floor = to_double("energy_floor", *v);
  if (auto v = kv.take("ionisation_threshold")) {
    c.integrator.ionisation_threshold = to_double("ionisation_threshold", *v);
  }
  if (auto v = kv.take("ionisation_dwell")) c.integrator.ionisation_dwell = to_double("ionisation_dwell", *v);
  if (auto v = kv.take("field_sampling")) {
    if (*v == "interpolated") {
      c.integrator.sampling = FieldSampling::interpolated;
    } else if (*v == "exact") {
      c.integrator.sampling = FieldSampling::exact;
    } else if (*v == "tabulated") {
      c.integrator.sampling = FieldSampling::tabulated;
    } else {
      key_error("field_sampling", "expected interpolated, exact or tabulated");
    }
  }
  if (auto v = kv.take("guard_radius")) c.integrator.guard_radius = to_double("guard_radius", *v);
  if (auto v = kv.take("field")) c.field_on = to_bool("field", *v);
  if (auto v = kv.take("initial_mapping")) {
    try {
      c.mapping = parse_initial_mapping(*v);
    } catch (const std::invalid_argument& e) {
      key_error("initial_mapping", e.what());
    }
  }
  if (auto v = kv.take("initial")) {
    if (*v == "conjecture") {
      c.initial = InitialSource::conjecture;
    } else if (*v == "explicit") {
      c.initial = InitialSource::explicit_state;
    } else {
      key_error("initial", "expected conjecture or explicit");
    }
  }
  if (auto v = kv.take("initial_r")) c.initial_r = to_vec3("initial_r", *v);
  if (auto v = kv.take("initial_v")) c.initial_v = to_vec3("initial_v", *v);
  if (auto v = kv.take("t_max")) c.t_max = to_double("t_max", *v);
  if (auto v = kv.take("max_orbits")) c.max_orbits = to_unsigned("max_orbits", *v);
  if (auto v = kv.take("ensemble_size")) c.ensemble_size = to_unsigned("ensemble_size", *v);
  if (auto v = kv.take("sample_stride")) c.sample_stride = to_unsigned("sample_stride", *v);
  if (auto v = kv.take("chunk_size")) c.plan.chunk_size = to_unsigned("chunk_size", *v);
  if (auto v = kv.take("precision")) {
    if (*v == "extended") {
      c.plan.precision = Precision::extended;
    } else if (*v == "mixed_float") {
      c.plan.precision = Precision::mixed_float;
    } else {
      key_error("precision", "expected extended or mixed_float");
    }
  }
  if (auto v = kv.take("sort_by_magnitude")) c.plan.sort_by_magnitude = to_bool("sort_by_magnitude", *v);
  if (auto v = kv.take("workers")) c.plan.worker_count = static_cast<int>(to_integer("workers", *v));
  if (auto v = kv.take("output_dir")) c.output_dir = *v;
  if (auto v = kv.take("record_format")) {
    if (*v == "csv") {
      c.record_format = RecordFormat::csv;
    } else if (*v == "binary") {
      c.record_format = RecordFormat::binary;
    } else {
      key_error("record_format", "expected csv or binary");
    }
  }
  if (auto v = kv.take("checkpoint_every")) c.checkpoint_every = to_unsigned("checkpoint_every", *v);
  if (auto v = kv.take("histogram_bins")) c.histogram_bins = to_unsigned("histogram_bins", *v);
  kv.reject_leftovers();

  // Domain checks that involve several keys.
  c.integrator.validate();  // messages start with the key name
  if (!(c.t_max > 0.0)) key_error("t_max", "must be positive");
  if (c.ensemble_size < 1) key_error("ensemble_size", "must be >= 1");
  if (c.sample_stride < 1) key_error("sample_stride", "must be >= 1");
  if (c.histogram_bins < 2) key_error("histogram_bins", "must be >= 2");
  if (c.plan.worker_count < 0) key_error("workers", "must be >= 0");
  try {
    c.plan.validate();
  } catch (const std::invalid_argument& e) {
    key_error("chunk_size", e.what());
  }
  if (c.initial == InitialSource::explicit_state && norm(c.initial_r) == 0.0) {
    key_error("initial_r", "must be nonzero");
  }
  const FrequencyGrid g = c.grid();
  if (c.integrator.cutoff == CutoffPolicy::fixed) {
    const auto [lo, hi] = fixed_window_bounds(c.formulation, g);
    const std::size_t n_lo = c.n_low.value_or(lo);
    const std::size_t n_hi = c.n_high.value_or(hi);
    if (n_hi > g.max_mode) key_error("n_high", "exceeds max_mode " + std::to_string(g.max_mode));
    if (!(n_lo < n_hi)) key_error("n_low", "must be below n_high");
    if (n_lo != 0 && c.formulation != Formulation::mixed) {
      key_error("n_low", "must be 0 unless formulation = mixed");
    }
  } else if (c.n_low || c.n_high) {
    key_error(c.n_low ? "n_low" : "n_high", "only valid with cutoff = fixed");
  }
  return c;
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream o;
  o << "Z = " << c.Z << '\n';
  o << "N = " << c.N << '\n';
  o << "seed = " << c.seed << '\n';
  o << "alpha = " << fmt(c.alpha) << '\n';
  if (c.beta) o << "beta = " << fmt(*c.beta) << '\n';
  if (c.cutoff_scale) o << "cutoff_scale = " << fmt(*c.cutoff_scale) << '\n';
  o << "max_mode = " << c.max_mode << '\n';
  o << "formulation = " << to_string(c.formulation) << '\n';
  o << "cutoff = " << to_string(c.integrator.cutoff) << '\n';
  o << "n_harm = " << fmt(c.integrator.n_harm) << '\n';
  o << "switch_increment = " << fmt(c.integrator.switch_increment) << '\n';
  if (c.n_low) o << "n_low = " << *c.n_low << '\n';
  if (c.n_high) o << "n_high = " << *c.n_high << '\n';
  o << "steps_per_orbit = " << c.integrator.steps_per_orbit << '\n';
  o << "field_refreshes_per_max_period = " << c.integrator.field_refreshes_per_max_period << '\n';
  o << "interpolation_order = " << c.integrator.interpolation_order << '\n';
  o << "energy_floor = " << fmt(c.integrator.energy_floor) << '\n';
  o << "ionisation_threshold = " << fmt(c.integrator.ionisation_threshold) << '\n';
  o << "ionisation_dwell = " << fmt(c.integrator.ionisation_dwell) << '\n';
  o << "field_sampling = " << to_string(c.integrator.sampling) << '\n';
  o << "guard_radius = " << fmt(c.integrator.guard_radius) << '\n';
  o << "field = " << (c.field_on ? "on" : "off") << '\n';
  o << "initial_mapping = " << to_string(c.mapping) << '\n';
  o << "initial = " << (c.initial == InitialSource::conjecture ? "conjecture" : "explicit") << '\n';
  o << "initial_r = " << fmt(c.initial_r) << '\n';
  o << "initial_v = " << fmt(c.initial_v) << '\n';
  o << "t_max = " << fmt(c.t_max) << '\n';
  o << "max_orbits = " << c.max_orbits << '\n';
  o << "ensemble_size = " << c.ensemble_size << '\n';
  o << "sample_stride = " << c.sample_stride << '\n';
  o << "chunk_size = " << c.plan.chunk_size << '\n';
  o << "precision = " << (c.plan.precision == Precision::extended ? "extended" : "mixed_float") << '\n';
  o << "sort_by_magnitude = " << (c.plan.sort_by_magnitude ? "true" : "false") << '\n';
  o << "workers = " << c.plan.worker_count << '\n';
  o << "output_dir = " << c.output_dir << '\n';
  o << "record_format = " << to_string(c.record_format) << '\n';
  o << "checkpoint_every = " << c.checkpoint_every << '\n';
  o << "histogram_bins = " << c.histogram_bins << '\n';
  return o.str();
}

}  // namespace sedsim
