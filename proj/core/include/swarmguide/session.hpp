#pragma once

// Live session state machine, independent of any transport.
//
// Client -> server (JSON text):
//   {"type":"hand_pose","t_client":..,"x":..,"y":..}
//   {"type":"control","action":"start"|"pause"|"reset"}
//   {"type":"control","action":"set_mode","mode":"visual"|"blind"}
//   {"type":"control","action":"load_scenario","name":".."}
// Server -> client: scenario, state, pattern, metrics_summary, heartbeat, error.

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmguide/scenario.hpp"
#include "swarmguide/sim.hpp"
#include "swarmguide/trace.hpp"

namespace swarmguide {

enum class SessionMode { Visual, Blind };

[[nodiscard]] std::string_view to_string(SessionMode mode);

struct SessionOptions {
  SessionMode mode = SessionMode::Visual;
  int decimation = 2;                   // state frame every n-th tick
  std::filesystem::path scenario_dir;  // where load_scenario looks up <name>.json
};

class SessionCore {
 public:
  explicit SessionCore(Scenario scenario, SessionOptions options = {});

  struct Response {
    std::vector<nlohmann::json> reply;      // to the sender only
    std::vector<nlohmann::json> broadcast;  // to every client
  };

  /// Malformed or unknown messages produce an error reply; nothing is dropped silently.
  Response handle_message(std::string_view text);

  /// One paced tick. Consumes at most the latest pending hand pose (older ones were
  /// overwritten) and returns the frames to broadcast. Does nothing while paused.
  std::vector<nlohmann::json> tick();

  /// Pauses the simulation; the world is kept as is.
  void on_disconnect();

  [[nodiscard]] nlohmann::json scenario_frame() const;
  [[nodiscard]] nlohmann::json heartbeat_frame(long overruns, long dropped_frames) const;

  [[nodiscard]] bool running() const { return running_; }
  [[nodiscard]] bool finished() const { return finished_; }
  [[nodiscard]] SessionMode mode() const { return options_.mode; }
  [[nodiscard]] const Scenario& scenario() const { return scenario_; }
  [[nodiscard]] const Simulator& simulator() const { return *sim_; }
  [[nodiscard]] const TraceLog& trace() const { return sim_->trace(); }
  /// Hand samples actually fed to the simulator, starting with the t = 0 seed.
  [[nodiscard]] HandTrace consumed_hand_trace() const { return HandTrace(consumed_); }

  /// trace.csv, events.jsonl and hand_trace.csv. Replaying hand_trace.csv headlessly
  /// for trace().rows.size() ticks reproduces the rows exactly.
  void write_logs(const std::filesystem::path& dir) const;

 private:
  void restart();
  nlohmann::json state_frame(const TickRecord& row) const;

  Scenario scenario_;
  SessionOptions options_;
  std::optional<Simulator> sim_;
  std::vector<HandSample> consumed_;
  std::optional<Vec3> pending_pose_;
  Vec3 hand_;
  bool running_ = false;
  bool finished_ = false;
  nlohmann::json unsent_events_ = nlohmann::json::array();
};

[[nodiscard]] nlohmann::json error_frame(std::string_view code, std::string_view detail);

}  // namespace swarmguide
