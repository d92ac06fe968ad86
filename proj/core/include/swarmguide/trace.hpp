#pragma once

// Per-tick trace log and hand-trace files.
//
// A trace directory holds trace.csv (one header comment line with JSON
// metadata, a column line, one row per tick) and events.jsonl.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmguide/formation.hpp"
#include "swarmguide/tactile.hpp"
#include "swarmguide/vec.hpp"

namespace swarmguide {

inline constexpr const char* kTraceFormat = "swarmguide-trace/1";

struct TickRecord {
  long tick = 0;
  double t = 0.0;
  Vec3 hand;
  Vec3 hand_velocity;
  std::vector<Vec3> goals;        // commanded, after obstacle avoidance
  std::vector<Vec3> positions;
  std::vector<Vec3> corrections;  // per link
  double area = 0.0;
  std::optional<double> com_displacement;
  FormationLabel label = FormationLabel::Regular;
  std::optional<PatternId> pattern;

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

enum class EventKind { Collision, FormationChange, PatternStart, PatternEnd, Finish };

[[nodiscard]] std::string_view to_string(EventKind kind);
[[nodiscard]] EventKind parse_event_kind(std::string_view text);

struct SimEvent {
  long tick = 0;
  double t = 0.0;
  EventKind kind = EventKind::Collision;
  nlohmann::json detail = nlohmann::json::object();

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

[[nodiscard]] nlohmann::json to_json(const SimEvent& event);
[[nodiscard]] SimEvent event_from_json(const nlohmann::json& j);

struct TraceLog {
  nlohmann::json header = nlohmann::json::object();
  std::vector<int> drone_ids;
  std::size_t link_count = 0;
  std::vector<TickRecord> rows;
  std::vector<SimEvent> events;

  [[nodiscard]] double sample_time() const;
  [[nodiscard]] double default_area() const;
};

/// Column names in their frozen order.
[[nodiscard]] std::vector<std::string> trace_columns(std::span<const int> drone_ids, std::size_t link_count);

/// Shortest text that parses back to the same double; "nan" for NaN.
[[nodiscard]] std::string format_number(double value);

void write_trace_csv(const TraceLog& log, std::ostream& out);
void write_events_jsonl(std::span<const SimEvent> events, std::ostream& out);
/// Writes trace.csv and events.jsonl into `dir`, creating it if needed.
void write_trace(const TraceLog& log, const std::filesystem::path& dir);

/// Reads trace.csv (a directory or the file itself) and events.jsonl when present beside it.
/// Throws TraceFormatError.
[[nodiscard]] TraceLog read_trace(const std::filesystem::path& path);
[[nodiscard]] TraceLog read_trace_csv(std::istream& in);
[[nodiscard]] std::vector<SimEvent> read_events_jsonl(std::istream& in);

// ---------------------------------------------------------------------------
// Hand traces: CSV `t,x,y,z`, any rate, strictly increasing t.

class HandTrace {
 public:
  HandTrace() = default;
  /// Throws TraceFormatError unless timestamps strictly increase and values are finite.
  explicit HandTrace(std::vector<HandSample> samples);

  [[nodiscard]] bool empty() const { return samples_.empty(); }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const std::vector<HandSample>& samples() const { return samples_; }
  [[nodiscard]] double end_time() const { return samples_.empty() ? 0.0 : samples_.back().t; }

  /// Linear interpolation; holds the first/last sample outside the recorded span.
  /// Exact timestamp hits return the stored sample unchanged.
  [[nodiscard]] std::optional<Vec3> at(double t) const;

 private:
  std::vector<HandSample> samples_;
};

[[nodiscard]] HandTrace read_hand_trace(std::istream& in);
[[nodiscard]] HandTrace read_hand_trace(const std::filesystem::path& path);
void write_hand_trace(const HandTrace& trace, std::ostream& out);
void write_hand_trace(const HandTrace& trace, const std::filesystem::path& path);

}  // namespace swarmguide
