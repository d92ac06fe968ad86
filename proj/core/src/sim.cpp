#include "swarmguide/sim.hpp"

#include <algorithm>
#include <cmath>

#include "swarmguide/apf.hpp"
#include "swarmguide/errors.hpp"

namespace swarmguide {

using nlohmann::json;

PidOutput pid_track(const DroneState& drone, const Vec3& goal, const PidGains& gains, double sample_time) {
  PidOutput out;
  out.error = goal - drone.position;
  const Vec3 rate = drone.has_previous_error ? (out.error - drone.previous_error) * (1.0 / sample_time) : Vec3{};
  for (int axis = 0; axis < kAxes; ++axis) {
    const PidAxisGains& g = axis == 2 ? gains.z : gains.xy;
    const double integral = std::clamp(drone.integrator[axis] + out.error[axis] * sample_time,
                                       -gains.integrator_limit, gains.integrator_limit);
    out.integrator[axis] = integral;
    out.acceleration[axis] = g.kp * out.error[axis] + g.kd * rate[axis] + g.ki * integral;
  }
  const double magnitude = out.acceleration.norm();
  if (magnitude > gains.max_accel) out.acceleration *= gains.max_accel / magnitude;
  return out;
}

void commit(DroneState& drone, const PidOutput& out) {
  drone.integrator = out.integrator;
  drone.previous_error = out.error;
  drone.has_previous_error = true;
}

void integrate(DroneState& drone, const Vec3& acceleration, double max_speed, double sample_time) {
  drone.velocity += acceleration * sample_time;
  const double speed = drone.velocity.norm();
  if (speed > max_speed) drone.velocity *= max_speed / speed;
  drone.position += drone.velocity * sample_time;
}

namespace {

std::vector<Vec3> positions_of(const std::vector<DroneState>& drones) {
  std::vector<Vec3> out;
  out.reserve(drones.size());
  for (const auto& d : drones) out.push_back(d.position);
  return out;
}

std::vector<Vec3> default_positions(const Scenario& s) {
  return nominal_slots(s.formation, s.start_hand);
}

Scenario validated(Scenario s) {
  validate(s.formation);
  if (!(s.sample_time > 0.0)) throw ParameterError("sample_time", "must be > 0");
  for (const auto& o : s.obstacles) validate(o);
  if (s.avoidance_enabled) validate(s.apf);
  return s;
}

}  // namespace

json trace_header(const Scenario& s, const FormationReference& reference, unsigned long seed) {
  const auto& f = s.formation;
  json ids = json::array();
  for (const auto& d : f.drones) ids.push_back(d.id);
  json links = json::array();
  for (const auto& l : f.links) {
    links.push_back({{"source", l.source == kHandNode ? json("hand") : json(f.drones[static_cast<std::size_t>(l.source)].id)},
                     {"target", f.drones[static_cast<std::size_t>(l.target)].id},
                     {"mass", l.params.mass},
                     {"damping", l.params.damping},
                     {"stiffness", l.params.stiffness},
                     {"limits", {l.limits.limit.x, l.limits.limit.y, l.limits.limit.z}}});
  }
  json order = json::array();
  for (int idx : reference.polygon_order) order.push_back(f.drones[static_cast<std::size_t>(idx)].id);
  const json doc = to_json(s);
  return {{"format", kTraceFormat},
          {"scenario", s.name},
          {"scenario_hash", scenario_hash(s)},
          {"sample_time", s.sample_time},
          {"seed", seed},
          {"drone_ids", ids},
          {"links", links},
          {"polygon_order", order},
          {"default_area", reference.area},
          {"layout", s.layout},
          {"gains",
           {{"velocity_gain", f.velocity_gain},
            {"hand_estimator", doc.at("hand_estimator")},
            {"pid", doc.at("pid")},
            {"apf", doc.at("apf")},
            {"max_speed", s.max_speed}}},
          {"thresholds", doc.at("thresholds")}};
}

Simulator::Simulator(Scenario scenario, const Vec3& initial_hand, unsigned long seed)
    : scenario_(validated(std::move(scenario))),
      hand_(scenario_.hand_estimator),
      network_(scenario_.formation, scenario_.sample_time),
      tactile_(make_reference(default_positions(scenario_), scenario_.formation.polygon_order), scenario_.tactile,
               scenario_.sample_time) {
  const auto slots = nominal_slots(scenario_.formation, initial_hand);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    DroneState d;
    d.id = scenario_.formation.drones[i].id;
    d.position = slots[i];
    drones_.push_back(d);
  }
  goals_ = slots;
  hand_.ingest({0.0, initial_hand});

  trace_.header = trace_header(scenario_, tactile_.reference(), seed);
  for (const auto& d : drones_) trace_.drone_ids.push_back(d.id);
  trace_.link_count = scenario_.formation.links.size();
}

void Simulator::check(const Vec3& v, const char* stage, int drone_id) const {
  if (!v.finite()) throw SimulationError(stage, drone_id);
}

const TickRecord& Simulator::step(const Vec3& hand) {
  const double T = scenario_.sample_time;
  const long tick = tick_ + 1;
  const double t = static_cast<double>(tick) * T;
  events_before_step_ = trace_.events.size();

  // 1
  check(hand, "hand_input", -1);
  hand_.ingest({t, hand});
  const Vec3 hand_velocity = hand_.velocity();
  check(hand_velocity, "hand_velocity", -1);

  // 2
  const auto& corrections = network_.update_links(hand_velocity);
  for (const auto& c : corrections) check(c, "update_links", -1);

  // 3
  const auto positions = positions_of(drones_);
  GoalSet goalset = compute_goals(scenario_.formation, hand, positions, corrections);

  // 4
  const bool avoid = scenario_.avoidance_enabled && !scenario_.obstacles.empty();
  for (std::size_t i = 0; i < drones_.size(); ++i) {
    auto& d = drones_[i];
    check(goalset.goals[i], "compute_goals", d.id);
    if (!avoid) continue;
    Vec2 push;
    if (!penetrated_obstacle(d.position.xy(), scenario_.obstacles)) {
      push = repulsive_velocity(d.position.xy(), scenario_.obstacles, scenario_.apf);
    }
    d.avoidance_offset += (push - d.avoidance_offset * (1.0 / scenario_.avoidance_relaxation_s)) * T;
    if (push == Vec2{} && d.avoidance_offset.squared_norm() < 1e-24) d.avoidance_offset = {};
    goalset.goals[i].x += d.avoidance_offset.x;
    goalset.goals[i].y += d.avoidance_offset.y;
    check(goalset.goals[i], "avoidance", d.id);
  }
  goals_ = goalset.goals;

  // 5, 6
  for (std::size_t i = 0; i < drones_.size(); ++i) {
    auto& d = drones_[i];
    const PidOutput pid = pid_track(d, goals_[i], scenario_.pid, T);
    check(pid.acceleration, "pid", d.id);
    commit(d, pid);
    integrate(d, pid.acceleration, scenario_.max_speed, T);
    check(d.velocity, "integrate", d.id);
    check(d.position, "integrate", d.id);
  }

  // 7
  const auto moved = positions_of(drones_);
  json penetrations = json::array();
  for (const auto& d : drones_) {
    for (const auto& o : scenario_.obstacles) {
      const double rho = boundary_distance(d.position.xy(), o);
      if (rho <= 0.0) penetrations.push_back({{"drone", d.id}, {"obstacle", o.id}, {"depth", -rho}});
    }
  }
  json close_pairs = json::array();
  for (std::size_t i = 0; i < drones_.size(); ++i) {
    for (std::size_t j = i + 1; j < drones_.size(); ++j) {
      const double dist = (drones_[i].position - drones_[j].position).norm();
      if (dist < scenario_.safety.min_separation) {
        close_pairs.push_back({{"drones", {drones_[i].id, drones_[j].id}}, {"distance", dist}});
      }
    }
  }
  if (!penetrations.empty() || !close_pairs.empty()) {
    trace_.events.push_back({tick, t, EventKind::Collision,
                             {{"penetrations", penetrations}, {"separations", close_pairs}}});
  }

  const Vec2 reference_centroid = planar_centroid(nominal_slots(scenario_.formation, hand));
  const auto tac = tactile_.update(tick, moved, reference_centroid, hand_velocity.xy());
  if (tac.ended) {
    trace_.events.push_back({tick, t, EventKind::PatternEnd,
                             {{"pattern", to_string(tac.ended->id)}, {"start_tick", tac.ended->start_tick}}});
  }
  if (tac.label_changed) {
    trace_.events.push_back({tick, t, EventKind::FormationChange,
                             {{"label", to_string(tac.state.label)}, {"area", tac.state.area}}});
  }
  if (tac.started) {
    trace_.events.push_back({tick, t, EventKind::PatternStart,
                             {{"pattern", to_string(tac.started->id)},
                              {"end_tick", tac.started->end_tick},
                              {"label", to_string(tac.started->label)},
                              {"displacement_sign", tac.started->displacement_sign}}});
  }
  const Vec2 centroid = planar_centroid(moved);
  if (scenario_.finish && !finished_ && scenario_.finish->contains(centroid)) {
    finished_ = true;
    trace_.events.push_back({tick, t, EventKind::Finish, {{"centroid", {centroid.x, centroid.y}}}});
  }

  // 8
  TickRecord row;
  row.tick = tick;
  row.t = t;
  row.hand = hand;
  row.hand_velocity = hand_velocity;
  row.goals = goals_;
  row.positions = moved;
  row.corrections = goalset.corrections;
  row.area = tac.state.area;
  row.com_displacement = tac.displacement;
  row.label = tac.state.label;
  row.pattern = tac.active;
  trace_.rows.push_back(std::move(row));
  tick_ = tick;
  return trace_.rows.back();
}

std::span<const SimEvent> Simulator::last_events() const {
  return std::span<const SimEvent>(trace_.events).subspan(std::min(events_before_step_, trace_.events.size()));
}

WorldSnapshot Simulator::snapshot() const {
  WorldSnapshot s;
  s.tick = tick_;
  s.t = time();
  s.hand = hand_.position();
  s.hand_velocity = hand_.velocity();
  s.drones = drones_;
  s.goals = goals_;
  s.centroid = planar_centroid(positions_of(drones_));
  s.label = tactile_.label();
  if (!trace_.rows.empty()) s.active_pattern = trace_.rows.back().pattern;
  s.finished = finished_;
  return s;
}

long planned_ticks(const Scenario& scenario, const HandTrace& hand_trace, const RunOptions& options) {
  if (options.ticks) return std::max(0L, *options.ticks);
  if (scenario.duration_s) return static_cast<long>(std::llround(*scenario.duration_s / scenario.sample_time));
  return static_cast<long>(std::llround(hand_trace.end_time() / scenario.sample_time));
}

TraceLog run_scenario(const Scenario& scenario, const HandTrace& hand_trace, const RunOptions& options) {
  const double T = scenario.sample_time;
  auto hand_at = [&](double t) { return hand_trace.at(t).value_or(scenario.start_hand); };
  Simulator sim(scenario, hand_at(0.0), options.seed);
  const long ticks = planned_ticks(scenario, hand_trace, options);
  for (long k = 1; k <= ticks; ++k) sim.step(hand_at(static_cast<double>(k) * T));
  TraceLog log = sim.take_trace();
  log.header["source"] = "headless";
  return log;
}

}  // namespace swarmguide
