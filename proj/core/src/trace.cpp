#include "swarmguide/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "swarmguide/errors.hpp"

namespace swarmguide {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Collision: return "collision";
    case EventKind::FormationChange: return "formation_change";
    case EventKind::PatternStart: return "pattern_start";
    case EventKind::PatternEnd: return "pattern_end";
    case EventKind::Finish: return "finish";
  }
  return "collision";
}

EventKind parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::Collision, EventKind::FormationChange, EventKind::PatternStart, EventKind::PatternEnd,
                 EventKind::Finish}) {
    if (to_string(k) == text) return k;
  }
  throw TraceFormatError("unknown event type '" + std::string(text) + "'");
}

json to_json(const SimEvent& event) {
  json j = event.detail.is_object() ? event.detail : json::object();
  j["tick"] = event.tick;
  j["t"] = event.t;
  j["type"] = std::string(to_string(event.kind));
  return j;
}

SimEvent event_from_json(const json& j) {
  try {
    SimEvent e;
    e.tick = j.at("tick").get<long>();
    e.t = j.at("t").get<double>();
    e.kind = parse_event_kind(j.at("type").get<std::string>());
    e.detail = j;
    e.detail.erase("tick");
    e.detail.erase("t");
    e.detail.erase("type");
    return e;
  } catch (const json::exception& ex) {
    throw TraceFormatError(std::string("bad event record: ") + ex.what());
  }
}

double TraceLog::sample_time() const { return header.value("sample_time", 1.0 / 60.0); }
double TraceLog::default_area() const { return header.value("default_area", 0.0); }

std::vector<std::string> trace_columns(std::span<const int> drone_ids, std::size_t link_count) {
  std::vector<std::string> cols = {"tick", "t", "hand_x", "hand_y", "hand_z", "hand_vx", "hand_vy", "hand_vz"};
  for (int id : drone_ids) {
    const std::string p = "d" + std::to_string(id) + "_";
    for (const char* s : {"gx", "gy", "gz", "x", "y", "z"}) cols.push_back(p + s);
  }
  for (std::size_t l = 0; l < link_count; ++l) {
    const std::string p = "l" + std::to_string(l) + "_";
    for (const char* s : {"cx", "cy", "cz"}) cols.push_back(p + s);
  }
  for (const char* s : {"area", "com_disp", "label", "pattern"}) cols.emplace_back(s);
  return cols;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

namespace {

double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw TraceFormatError("bad number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void put(std::ostream& out, const Vec3& v) {
  out << ',' << format_number(v.x) << ',' << format_number(v.y) << ',' << format_number(v.z);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_trace_csv(const TraceLog& log, std::ostream& out) {
  out << "# " << log.header.dump() << '\n';
  const auto cols = trace_columns(log.drone_ids, log.link_count);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : log.rows) {
    out << r.tick << ',' << format_number(r.t);
    put(out, r.hand);
    put(out, r.hand_velocity);
    for (std::size_t i = 0; i < r.positions.size(); ++i) {
      put(out, r.goals[i]);
      put(out, r.positions[i]);
    }
    for (const auto& c : r.corrections) put(out, c);
    out << ',' << format_number(r.area) << ','
        << (r.com_displacement ? format_number(*r.com_displacement) : std::string()) << ','
        << to_string(r.label) << ',' << (r.pattern ? to_string(*r.pattern) : std::string_view("-")) << '\n';
  }
}

void write_events_jsonl(std::span<const SimEvent> events, std::ostream& out) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

void write_trace(const TraceLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "trace.csv", std::ios::binary);
  std::ofstream events(dir / "events.jsonl", std::ios::binary);
  if (!csv || !events) throw TraceFormatError("cannot write trace into '" + dir.string() + "'");
  write_trace_csv(log, csv);
  write_events_jsonl(log.events, events);
}

TraceLog read_trace_csv(std::istream& in) {
  TraceLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw TraceFormatError("missing trace header line");
  try {
    log.header = json::parse(strip_cr(line).substr(2));
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("bad trace header: ") + e.what());
  }
  if (!std::getline(in, line)) throw TraceFormatError("missing column line");
  line = strip_cr(line);
  const auto names = split(line, ',');
  // Drone ids and the link count are recovered from the column names.
  for (const auto name : names) {
    if (name.size() > 4 && name.front() == 'd' && name.substr(name.size() - 3) == "_gx") {
      int id = 0;
      const auto digits = name.substr(1, name.size() - 4);
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw TraceFormatError("bad column '" + std::string(name) + "'");
      }
      log.drone_ids.push_back(id);
    } else if (name.size() > 4 && name.front() == 'l' && name.substr(name.size() - 3) == "_cx") {
      ++log.link_count;
    }
  }
  const auto cols = trace_columns(log.drone_ids, log.link_count);
  if (names.size() != cols.size()) throw TraceFormatError("column count mismatch");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (names[i] != cols[i]) throw TraceFormatError("unexpected column '" + std::string(names[i]) + "'");
  }

  const std::size_t n = log.drone_ids.size();
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != cols.size()) {
      throw TraceFormatError("row has " + std::to_string(f.size()) + " fields, expected " + std::to_string(cols.size()));
    }
    std::size_t k = 0;
    auto num = [&] { return parse_number(f[k++]); };
    auto vec = [&] {
      Vec3 v;
      v.x = num();
      v.y = num();
      v.z = num();
      return v;
    };
    TickRecord r;
    r.tick = static_cast<long>(num());
    r.t = num();
    r.hand = vec();
    r.hand_velocity = vec();
    for (std::size_t i = 0; i < n; ++i) {
      r.goals.push_back(vec());
      r.positions.push_back(vec());
    }
    for (std::size_t l = 0; l < log.link_count; ++l) r.corrections.push_back(vec());
    r.area = num();
    if (f[k].empty()) {
      ++k;
    } else {
      r.com_displacement = num();
    }
    const auto label = f[k++];
    if (label == "contracted") {
      r.label = FormationLabel::Contracted;
    } else if (label == "extended") {
      r.label = FormationLabel::Extended;
    } else if (label == "regular") {
      r.label = FormationLabel::Regular;
    } else {
      throw TraceFormatError("bad label '" + std::string(label) + "'");
    }
    const auto pattern = f[k++];
    if (pattern != "-") {
      try {
        r.pattern = parse_pattern_id(pattern);
      } catch (const std::invalid_argument& e) {
        throw TraceFormatError(e.what());
      }
    }
    if (!log.rows.empty() && r.tick <= log.rows.back().tick) throw TraceFormatError("rows not ordered by tick");
    log.rows.push_back(std::move(r));
  }
  return log;
}

std::vector<SimEvent> read_events_jsonl(std::istream& in) {
  std::vector<SimEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    try {
      out.push_back(event_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw TraceFormatError(std::string("bad event line: ") + e.what());
    }
  }
  return out;
}

TraceLog read_trace(const std::filesystem::path& path) {
  const auto csv_path = std::filesystem::is_directory(path) ? path / "trace.csv" : path;
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) throw TraceFormatError("cannot open '" + csv_path.string() + "'");
  TraceLog log = read_trace_csv(csv);
  const auto events_path = csv_path.parent_path() / "events.jsonl";
  if (std::ifstream events(events_path, std::ios::binary); events) log.events = read_events_jsonl(events);
  return log;
}

// ---------------------------------------------------------------------------

HandTrace::HandTrace(std::vector<HandSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t) || !samples_[i].position.finite()) {
      throw TraceFormatError("hand trace sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw TraceFormatError("hand trace timestamps must strictly increase (sample " + std::to_string(i) + ")");
    }
  }
}

std::optional<Vec3> HandTrace::at(double t) const {
  if (samples_.empty()) return std::nullopt;
  if (t <= samples_.front().t) return samples_.front().position;
  if (t >= samples_.back().t) return samples_.back().position;
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                                   [](const HandSample& s, double value) { return s.t < value; });
  if (it->t == t) return it->position;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return lo.position + (hi.position - lo.position) * w;
}

HandTrace read_hand_trace(std::istream& in) {
  std::vector<HandSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("t,", 0) == 0) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw TraceFormatError("hand trace line " + std::to_string(line_no) + ": expected t,x,y,z");
    try {
      samples.push_back({parse_number(f[0]), {parse_number(f[1]), parse_number(f[2]), parse_number(f[3])}});
    } catch (const TraceFormatError& e) {
      throw TraceFormatError("hand trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return HandTrace(std::move(samples));
}

HandTrace read_hand_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceFormatError("cannot open hand trace '" + path.string() + "'");
  return read_hand_trace(in);
}

void write_hand_trace(const HandTrace& trace, std::ostream& out) {
  out << "t,x,y,z\n";
  for (const auto& s : trace.samples()) {
    out << format_number(s.t);
    put(out, s.position);
    out << '\n';
  }
}

void write_hand_trace(const HandTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceFormatError("cannot write hand trace '" + path.string() + "'");
  write_hand_trace(trace, out);
}

}  // namespace swarmguide
