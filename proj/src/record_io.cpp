#include "sedsim/record_io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace sedsim {

namespace {

constexpr char kRecordMagic[8] = {'S', 'E', 'D', 'R', 'E', 'C', '0', '1'};
constexpr char kCheckpointMagic[8] = {'S', 'E', 'D', 'C', 'K', 'P', '0', '1'};

enum Tag : std::uint32_t {
  kTagEnd = 0,
  kTagMeta = 1,
  kTagMessage = 2,
  kTagSamples = 3,
  kTagEvents = 4,
  kTagConfig = 16,
  kTagTrajectory = 17,
  kTagState = 18,
  kTagWindow = 19,
  kTagRecord = 20,
};

// Little-endian encoder / decoder over a byte buffer.
class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Vec3& v) {
    f64(v.x);
    f64(v.y);
    f64(v.z);
  }
  void bytes(const std::string& s) { buf_.append(s); }
  const std::string& str() const { return buf_; }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  Vec3 vec() {
    Vec3 v;
    v.x = f64();
    v.y = f64();
    v.z = f64();
    return v;
  }
  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw FormatError("truncated binary block");
    const std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  template <typename U>
  U get() {
    const std::string_view s = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

void put_block(Writer& w, std::uint32_t tag, const std::string& payload) {
  w.u32(tag);
  w.u64(payload.size());
  w.bytes(payload);
}

std::string encode_record(const TrajectoryRecord& rec) {
  Writer out;
  out.bytes(std::string(kRecordMagic, 8));
  {
    Writer m;
    m.u64(rec.passages);
    m.u64(rec.steps);
    m.f64(rec.t_end);
    m.f64(rec.max_linear_shift);
    m.u8(rec.aborted ? 1 : 0);
    m.u8(rec.ionisation_time ? 1 : 0);
    m.f64(rec.ionisation_time.value_or(0.0));
    put_block(out, kTagMeta, m.str());
  }
  put_block(out, kTagMessage, rec.abort_message);
  {
    Writer s;
    s.u64(rec.samples.size());
    for (const Sample& x : rec.samples) {
      s.f64(x.t);
      s.f64(x.E);
      s.f64(x.L);
      s.f64(x.eps);
      s.f64(x.r);
      s.u32(x.flags);
    }
    put_block(out, kTagSamples, s.str());
  }
  {
    Writer e;
    e.u64(rec.events.size());
    for (const TrajectoryEvent& x : rec.events) {
      e.u32(static_cast<std::uint32_t>(x.kind));
      e.f64(x.t);
      e.f64(x.value_a);
      e.f64(x.value_b);
      e.u64(x.old_low);
      e.u64(x.old_high);
      e.u64(x.new_low);
      e.u64(x.new_high);
    }
    put_block(out, kTagEvents, e.str());
  }
  put_block(out, kTagEnd, "");
  return out.str();
}

EventKind event_kind_from(std::uint32_t k) {
  if (k < 1 || k > 4) throw FormatError("unknown event kind " + std::to_string(k));
  return static_cast<EventKind>(k);
}

TrajectoryRecord decode_record(std::string_view data) {
  Reader r(data);
  if (r.take(8) != std::string_view(kRecordMagic, 8)) throw FormatError("not a sedsim binary record");
  TrajectoryRecord rec;
  bool ended = false;
  while (!ended) {
    const std::uint32_t tag = r.u32();
    const std::uint64_t len = r.u64();
    Reader b(r.take(len));
    switch (tag) {
      case kTagEnd:
        ended = true;
        break;
      case kTagMeta: {
        rec.passages = b.u64();
        rec.steps = b.u64();
        rec.t_end = b.f64();
        rec.max_linear_shift = b.f64();
        rec.aborted = b.u8() != 0;
        const bool has_ion = b.u8() != 0;
        const double ion = b.f64();
        if (has_ion) rec.ionisation_time = ion;
        break;
      }
      case kTagMessage:
        rec.abort_message = std::string(b.take(len));
        break;
      case kTagSamples: {
        const std::uint64_t n = b.u64();
        if (n > len / 44) throw FormatError("sample count exceeds block size");
        rec.samples.resize(n);
        for (Sample& x : rec.samples) {
          x.t = b.f64();
          x.E = b.f64();
          x.L = b.f64();
          x.eps = b.f64();
          x.r = b.f64();
          x.flags = b.u32();
        }
        break;
      }
      case kTagEvents: {
        const std::uint64_t n = b.u64();
        if (n > len / 60) throw FormatError("event count exceeds block size");
        rec.events.resize(n);
        for (TrajectoryEvent& x : rec.events) {
          x.kind = event_kind_from(b.u32());
          x.t = b.f64();
          x.value_a = b.f64();
          x.value_b = b.f64();
          x.old_low = b.u64();
          x.old_high = b.u64();
          x.new_low = b.u64();
          x.new_high = b.u64();
        }
        break;
      }
      default:
        break;  // unknown blocks are skipped
    }
  }
  return rec;
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad number '" + std::string(s) + "'");
  }
  return x;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad integer '" + std::string(s) + "'");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto k = s.find(sep, pos);
    out.push_back(s.substr(pos, k == s.npos ? s.npos : k - pos));
    if (k == s.npos) break;
    pos = k + 1;
  }
  return out;
}

EventKind parse_event_kind(std::string_view s) {
  for (std::uint32_t k = 1; k <= 4; ++k) {
    if (to_string(static_cast<EventKind>(k)) == s) return static_cast<EventKind>(k);
  }
  throw FormatError("unknown event kind '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::push: return "push";
    case EventKind::window_switch: return "window_switch";
    case EventKind::ionisation: return "ionisation";
    case EventKind::abort: return "abort";
  }
  return "?";
}

void write_record_csv(std::ostream& out, const TrajectoryRecord& rec) {
  out << "# sedsim trajectory record v1\n";
  out << "# passages=" << rec.passages << '\n';
  out << "# steps=" << rec.steps << '\n';
  out << "# t_end=" << g17(rec.t_end) << '\n';
  out << "# max_linear_shift=" << g17(rec.max_linear_shift) << '\n';
  out << "# aborted=" << (rec.aborted ? 1 : 0) << '\n';
  std::string msg = rec.abort_message;
  for (char& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  out << "# abort_message=" << msg << '\n';
  out << "# ionisation_time=" << (rec.ionisation_time ? g17(*rec.ionisation_time) : "none") << '\n';
  for (const TrajectoryEvent& e : rec.events) {
    out << "# event," << to_string(e.kind) << ',' << g17(e.t) << ',' << g17(e.value_a) << ','
        << g17(e.value_b) << ',' << e.old_low << ',' << e.old_high << ',' << e.new_low << ','
        << e.new_high << '\n';
  }
  out << "t,E,L,eps,r,flags\n";
  for (const Sample& s : rec.samples) {
    out << g17(s.t) << ',' << g17(s.E) << ',' << g17(s.L) << ',' << g17(s.eps) << ',' << g17(s.r)
        << ',' << s.flags << '\n';
  }
}

TrajectoryRecord read_record_csv(std::istream& in) {
  TrajectoryRecord rec;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string_view body = std::string_view(line).substr(1);
      if (!body.empty() && body[0] == ' ') body.remove_prefix(1);
      if (body.starts_with("event,")) {
        const auto f = split(body, ',');
        if (f.size() != 9) throw FormatError("event line needs 9 fields");
        TrajectoryEvent e;
        e.kind = parse_event_kind(f[1]);
        e.t = parse_double(f[2]);
        e.value_a = parse_double(f[3]);
        e.value_b = parse_double(f[4]);
        e.old_low = parse_u64(f[5]);
        e.old_high = parse_u64(f[6]);
        e.new_low = parse_u64(f[7]);
        e.new_high = parse_u64(f[8]);
        rec.events.push_back(e);
        continue;
      }
      const auto eq = body.find('=');
      if (eq == body.npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string_view val = body.substr(eq + 1);
      if (key == "passages") rec.passages = parse_u64(val);
      else if (key == "steps") rec.steps = parse_u64(val);
      else if (key == "t_end") rec.t_end = parse_double(val);
      else if (key == "max_linear_shift") rec.max_linear_shift = parse_double(val);
      else if (key == "aborted") rec.aborted = val == "1";
      else if (key == "abort_message") rec.abort_message = std::string(val);
      else if (key == "ionisation_time" && val != "none") rec.ionisation_time = parse_double(val);
      continue;
    }
    if (!header_seen) {
      if (line != "t,E,L,eps,r,flags") throw FormatError("missing column header");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6) throw FormatError("sample row needs 6 fields");
    rec.samples.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                           parse_double(f[3]), parse_double(f[4]),
                           static_cast<std::uint32_t>(parse_u64(f[5]))});
  }
  if (!header_seen) throw FormatError("missing column header");
  return rec;
}

void write_record_binary(std::ostream& out, const TrajectoryRecord& record) {
  const std::string bytes = encode_record(record);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TrajectoryRecord read_record_binary(std::istream& in) { return decode_record(slurp(in)); }

TrajectoryRecord read_record_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  const std::string data = slurp(in);
  if (data.size() >= 8 && data.compare(0, 8, std::string(kRecordMagic, 8)) == 0) {
    return decode_record(data);
  }
  std::istringstream ss(data);
  return read_record_csv(ss);
}

void write_checkpoint(std::ostream& out, const CheckpointFile& file) {
  const TrajectoryCheckpoint& c = file.checkpoint;
  Writer w;
  w.bytes(std::string(kCheckpointMagic, 8));
  put_block(w, kTagConfig, file.config_text);
  {
    Writer t;
    t.u64(file.trajectory_index);
    t.u64(file.trajectory_seed);
    put_block(w, kTagTrajectory, t.str());
  }
  {
    Writer s;
    s.u32(static_cast<std::uint32_t>(c.state.form));
    s.vec(c.state.x);
    s.vec(c.state.y);
    s.f64(c.state.t);
    s.vec(c.field_now.e);
    s.vec(c.field_now.a_low);
    s.vec(c.field_now.c_high);
    s.vec(c.field_now.a_high);
    s.f64(c.dt);
    s.f64(c.anchor);
    s.f64(c.k3_ref);
    s.f64(c.swept_angle);
    s.vec(c.last_r);
    s.u64(c.rng_counter);
    s.u32(c.pending_flags);
    s.u8(c.ion_run_start ? 1 : 0);
    s.f64(c.ion_run_start.value_or(0.0));
    put_block(w, kTagState, s.str());
  }
  {
    Writer s;
    s.u64(c.window.n_low);
    s.u64(c.window.n_high);
    s.vec(c.window.delta_A);
    s.vec(c.window.delta_C);
    s.vec(c.window.delta_A_moment);
    s.u64(c.window.switch_log.size());
    for (const WindowSwitch& x : c.window.switch_log) {
      s.f64(x.t);
      s.u64(x.old_low);
      s.u64(x.old_high);
      s.u64(x.new_low);
      s.u64(x.new_high);
      s.vec(x.mismatch_a);
      s.vec(x.mismatch_c);
    }
    put_block(w, kTagWindow, s.str());
  }
  put_block(w, kTagRecord, encode_record(c.record));
  put_block(w, kTagEnd, "");
  out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
}

CheckpointFile read_checkpoint(std::istream& in) {
  const std::string data = slurp(in);
  Reader r(data);
  if (data.size() < 8 || r.take(8) != std::string_view(kCheckpointMagic, 8)) {
    throw FormatError("not a sedsim checkpoint");
  }
  CheckpointFile file;
  TrajectoryCheckpoint& c = file.checkpoint;
  bool ended = false;
  unsigned seen = 0;
  while (!ended) {
    const std::uint32_t tag = r.u32();
    const std::uint64_t len = r.u64();
    Reader b(r.take(len));
    switch (tag) {
      case kTagEnd:
        ended = true;
        break;
      case kTagConfig:
        file.config_text = std::string(b.take(len));
        seen |= 1;
        break;
      case kTagTrajectory:
        file.trajectory_index = b.u64();
        file.trajectory_seed = b.u64();
        seen |= 2;
        break;
      case kTagState: {
        const std::uint32_t form = b.u32();
        if (form > 3) throw FormatError("bad formulation tag");
        c.state.form = static_cast<Formulation>(form);
        c.state.x = b.vec();
        c.state.y = b.vec();
        c.state.t = b.f64();
        c.field_now.e = b.vec();
        c.field_now.a_low = b.vec();
        c.field_now.c_high = b.vec();
        c.field_now.a_high = b.vec();
        c.dt = b.f64();
        c.anchor = b.f64();
        c.k3_ref = b.f64();
        c.swept_angle = b.f64();
        c.last_r = b.vec();
        c.rng_counter = b.u64();
        c.pending_flags = b.u32();
        const bool has_run = b.u8() != 0;
        const double run = b.f64();
        if (has_run) c.ion_run_start = run;
        seen |= 4;
        break;
      }
      case kTagWindow: {
        c.window.n_low = b.u64();
        c.window.n_high = b.u64();
        c.window.delta_A = b.vec();
        c.window.delta_C = b.vec();
        c.window.delta_A_moment = b.vec();
        const std::uint64_t n = b.u64();
        if (n > len / 88) throw FormatError("switch log exceeds block size");
        c.window.switch_log.resize(n);
        for (WindowSwitch& x : c.window.switch_log) {
          x.t = b.f64();
          x.old_low = b.u64();
          x.old_high = b.u64();
          x.new_low = b.u64();
          x.new_high = b.u64();
          x.mismatch_a = b.vec();
          x.mismatch_c = b.vec();
        }
        seen |= 8;
        break;
      }
      case kTagRecord:
        c.record = decode_record(b.take(len));
        seen |= 16;
        break;
      default:
        break;
    }
  }
  if (seen != 31) throw FormatError("checkpoint is missing required blocks");
  return file;
}

void write_histogram_csv(std::ostream& out, const std::string& quantity,
                         const HistogramReport& rep) {
  out << "# quantity=" << quantity << '\n';
  out << "# n_total=" << rep.n_total << '\n';
  out << "# n_in_range=" << rep.n_in_range << '\n';
  out << "# ks=" << g17(rep.ks) << '\n';
  out << "# ks_critical_1pct=" << g17(rep.ks_critical) << '\n';
  out << "bin_lo,bin_hi,count,height,pdf\n";
  for (std::size_t b = 0; b < rep.counts.size(); ++b) {
    out << g17(rep.edges[b]) << ',' << g17(rep.edges[b + 1]) << ',' << rep.counts[b] << ','
        << g17(rep.heights[b]) << ',' << g17(rep.overlay[b]) << '\n';
  }
}

}  // namespace sedsim
