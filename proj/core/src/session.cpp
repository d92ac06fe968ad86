#include "swarmguide/session.hpp"

#include <cmath>

#include "swarmguide/errors.hpp"
#include "swarmguide/metrics.hpp"

namespace swarmguide {

using nlohmann::json;

std::string_view to_string(SessionMode mode) { return mode == SessionMode::Blind ? "blind" : "visual"; }

json error_frame(std::string_view code, std::string_view detail) {
  return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

SessionCore::SessionCore(Scenario scenario, SessionOptions options)
    : scenario_(std::move(scenario)), options_(std::move(options)) {
  if (options_.decimation < 1) throw ParameterError("decimation", "must be >= 1");
  restart();
}

void SessionCore::restart() {
  hand_ = scenario_.start_hand;
  sim_.emplace(scenario_, hand_);
  consumed_.assign(1, HandSample{0.0, hand_});
  pending_pose_.reset();
  running_ = false;
  finished_ = false;
  unsent_events_ = json::array();
}

void SessionCore::on_disconnect() { running_ = false; }

namespace {

bool finite_number(const json& j, const char* key) {
  return j.contains(key) && j.at(key).is_number() && std::isfinite(j.at(key).get<double>());
}

json obstacles_json(const std::vector<Obstacle>& obstacles) {
  json out = json::array();
  for (const auto& o : obstacles) {
    out.push_back({{"id", o.id}, {"x", o.center.x}, {"y", o.center.y}, {"radius", o.radius}, {"influence", o.influence}});
  }
  return out;
}

}  // namespace

SessionCore::Response SessionCore::handle_message(std::string_view text) {
  Response r;
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    r.reply.push_back(error_frame("malformed", e.what()));
    return r;
  }
  if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
    r.reply.push_back(error_frame("malformed", "message needs a string \"type\""));
    return r;
  }
  const auto type = msg.at("type").get<std::string>();

  if (type == "hand_pose") {
    if (!finite_number(msg, "x") || !finite_number(msg, "y")) {
      r.reply.push_back(error_frame("malformed", "hand_pose needs finite x and y"));
      return r;
    }
    pending_pose_ = Vec3{msg.at("x").get<double>(), msg.at("y").get<double>(), scenario_.start_hand.z};
    return r;
  }

  if (type != "control") {
    r.reply.push_back(error_frame("unknown_type", "unknown message type '" + type + "'"));
    return r;
  }
  const auto action = msg.value("action", std::string{});
  if (action == "start") {
    if (finished_) {
      r.reply.push_back(error_frame("finished", "session finished; reset first"));
    } else {
      running_ = true;
    }
  } else if (action == "pause") {
    running_ = false;
  } else if (action == "reset") {
    restart();
    r.broadcast.push_back(scenario_frame());
  } else if (action == "set_mode") {
    const auto mode = msg.value("mode", std::string{});
    if (mode == "visual") {
      options_.mode = SessionMode::Visual;
    } else if (mode == "blind") {
      options_.mode = SessionMode::Blind;
    } else {
      r.reply.push_back(error_frame("bad_mode", "mode must be visual or blind"));
      return r;
    }
    r.broadcast.push_back(scenario_frame());
  } else if (action == "load_scenario") {
    const auto name = msg.value("name", std::string{});
    if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
      r.reply.push_back(error_frame("bad_scenario", "scenario name must be a plain preset name"));
      return r;
    }
    try {
      scenario_ = load_scenario(options_.scenario_dir / (name + ".json"));
    } catch (const std::exception& e) {
      r.reply.push_back(error_frame("bad_scenario", e.what()));
      return r;
    }
    restart();
    r.broadcast.push_back(scenario_frame());
  } else {
    r.reply.push_back(error_frame("unknown_action", "unknown control action '" + action + "'"));
  }
  return r;
}

std::vector<json> SessionCore::tick() {
  std::vector<json> frames;
  if (!running_ || finished_) return frames;

  if (pending_pose_) hand_ = *pending_pose_;
  pending_pose_.reset();
  const TickRecord& row = sim_->step(hand_);
  consumed_.push_back({row.t, hand_});

  for (const auto& e : sim_->last_events()) {
    unsent_events_.push_back(to_json(e));
    if (e.kind == EventKind::PatternStart) {
      const auto pattern = encode_pattern(parse_pattern_id(e.detail.at("pattern").get<std::string>()));
      frames.push_back({{"type", "pattern"}, {"id", to_string(pattern.id)}, {"tick", e.tick}, {"timeline", to_json(pattern)}});
    }
  }

  const bool out_of_time =
      scenario_.duration_s && row.tick >= std::llround(*scenario_.duration_s / scenario_.sample_time);
  finished_ = sim_->finished() || out_of_time;

  if (row.tick % options_.decimation == 0 || finished_) {
    frames.push_back(state_frame(row));
    unsent_events_ = json::array();
  }
  if (finished_) {
    running_ = false;
    json summary = {{"type", "metrics_summary"}, {"tick", row.tick}};
    if (sim_->trace().rows.size() >= 3) {
      summary["metrics"] = to_json(compute_run_metrics(sim_->trace()));
    } else {
      summary["metrics"] = nullptr;
    }
    frames.push_back(std::move(summary));
  }
  return frames;
}

json SessionCore::state_frame(const TickRecord& row) const {
  json frame = {{"type", "state"},
                {"tick", row.tick},
                {"t_sim", row.t},
                {"hand", {{"x", row.hand.x}, {"y", row.hand.y}}},
                {"formation_label", to_string(row.label)},
                {"active_pattern", row.pattern ? json(to_string(*row.pattern)) : json(nullptr)},
                {"events", unsent_events_}};
  if (options_.mode == SessionMode::Visual) {
    json drones = json::array();
    for (std::size_t i = 0; i < row.positions.size(); ++i) {
      drones.push_back({{"id", sim_->drones()[i].id},
                        {"x", row.positions[i].x},
                        {"y", row.positions[i].y},
                        {"gx", row.goals[i].x},
                        {"gy", row.goals[i].y}});
    }
    const Vec2 c = planar_centroid(row.positions);
    frame["drones"] = drones;
    frame["centroid"] = {{"x", c.x}, {"y", c.y}};
  }
  return frame;
}

json SessionCore::scenario_frame() const {
  json ids = json::array();
  for (const auto& d : scenario_.formation.drones) ids.push_back(d.id);
  json frame = {{"type", "scenario"},
                {"name", scenario_.name},
                {"mode", to_string(options_.mode)},
                {"sample_time", scenario_.sample_time},
                {"decimation", options_.decimation},
                {"drone_ids", ids},
                {"tick", sim_->tick()},
                {"running", running_}};
  if (options_.mode == SessionMode::Visual) {
    frame["obstacles"] = obstacles_json(scenario_.obstacles);
    if (scenario_.finish) {
      frame["finish_region"] = {{"min", {scenario_.finish->min.x, scenario_.finish->min.y}},
                                {"max", {scenario_.finish->max.x, scenario_.finish->max.y}}};
    }
  }
  return frame;
}

json SessionCore::heartbeat_frame(long overruns, long dropped_frames) const {
  return {{"type", "heartbeat"},
          {"tick", sim_->tick()},
          {"running", running_},
          {"overruns", overruns},
          {"dropped_frames", dropped_frames}};
}

void SessionCore::write_logs(const std::filesystem::path& dir) const {
  TraceLog log = sim_->trace();
  log.header["source"] = "live";
  write_trace(log, dir);
  write_hand_trace(consumed_hand_trace(), dir / "hand_trace.csv");
}

}  // namespace swarmguide
