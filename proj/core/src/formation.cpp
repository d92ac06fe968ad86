#include "swarmguide/formation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "swarmguide/errors.hpp"

namespace swarmguide {

int FormationSpec::index_of(int drone_id) const {
  for (std::size_t i = 0; i < drones.size(); ++i) {
    if (drones[i].id == drone_id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

bool valid_drone(const FormationSpec& spec, int index) {
  return index >= 0 && static_cast<std::size_t>(index) < spec.size();
}

std::vector<int> anchor_deps(const Anchor& a) {
  switch (a.kind) {
    case AnchorKind::Hand: return {};
    case AnchorKind::Drone: return {a.first};
    case AnchorKind::Midpoint: return {a.first, a.second};
  }
  return {};
}

Vec3 anchor_position(const Anchor& a, const Vec3& hand, std::span<const Vec3> positions) {
  switch (a.kind) {
    case AnchorKind::Hand: return hand;
    case AnchorKind::Drone: return positions[static_cast<std::size_t>(a.first)];
    case AnchorKind::Midpoint:
      return (positions[static_cast<std::size_t>(a.first)] + positions[static_cast<std::size_t>(a.second)]) * 0.5;
  }
  return hand;
}

// Topological order of drones by anchor dependency; empty if cyclic.
std::vector<int> anchor_order(const FormationSpec& spec) {
  const std::size_t n = spec.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int d : anchor_deps(spec.drones[i].anchor)) {
      ++indegree[i];
      dependents[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));
    }
  }
  std::queue<int> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int i = ready.front();
    ready.pop();
    order.push_back(i);
    for (int d : dependents[static_cast<std::size_t>(i)]) {
      if (--indegree[static_cast<std::size_t>(d)] == 0) ready.push(d);
    }
  }
  if (order.size() != n) return {};
  return order;
}

}  // namespace

void validate(const FormationSpec& spec) {
  const std::size_t n = spec.size();
  if (n == 0) throw SpecError("formation needs at least one drone");
  if (!std::isfinite(spec.velocity_gain)) throw SpecError("velocity gain must be finite");
  if (spec.away_axis < 0 || spec.away_axis > 2) throw SpecError("away axis must be 0, 1 or 2");

  for (std::size_t i = 0; i < n; ++i) {
    const auto& rule = spec.drones[i];
    if (!rule.offset.finite()) throw SpecError("drone " + std::to_string(rule.id) + ": offset not finite");
    for (int d : anchor_deps(rule.anchor)) {
      if (!valid_drone(spec, d)) throw SpecError("drone " + std::to_string(rule.id) + ": anchor references unknown drone");
      if (static_cast<std::size_t>(d) == i) throw SpecError("drone " + std::to_string(rule.id) + ": anchored to itself");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.drones[j].id == rule.id) throw SpecError("duplicate drone id " + std::to_string(rule.id));
    }
  }
  if (anchor_order(spec).empty()) throw SpecError("drone anchors form a cycle");

  // Link graph: DAG rooted at the hand, covering every drone.
  std::vector<std::vector<int>> out(n + 1);  // node 0 is the hand, drone i is node i+1
  std::vector<int> indegree(n + 1, 0);
  for (const auto& link : spec.links) {
    if (link.source != kHandNode && !valid_drone(spec, link.source)) throw SpecError("link source references unknown drone");
    if (!valid_drone(spec, link.target)) throw SpecError("link target references unknown drone");
    if (link.source == link.target) throw SpecError("link connects a drone to itself");
    for (int axis = 0; axis < kAxes; ++axis) {
      if (!(link.limits.limit[axis] >= 0.0)) throw SpecError("saturation limits must be >= 0");
      if (!std::isfinite(link.sign[axis])) throw SpecError("link sign must be finite");
    }
    out[static_cast<std::size_t>(link.source + 1)].push_back(link.target + 1);
    ++indegree[static_cast<std::size_t>(link.target + 1)];
  }
  if (indegree[0] != 0) throw SpecError("hand cannot be a link target");

  std::queue<int> ready;
  std::vector<int> deg = indegree;
  for (std::size_t v = 0; v <= n; ++v) {
    if (deg[v] == 0) ready.push(static_cast<int>(v));
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++visited;
    for (int w : out[static_cast<std::size_t>(v)]) {
      if (--deg[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (visited != n + 1) throw SpecError("link graph has a cycle");

  std::vector<bool> reached(n + 1, false);
  std::vector<int> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : out[static_cast<std::size_t>(v)]) {
      if (!reached[static_cast<std::size_t>(w)]) {
        reached[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reached[i + 1]) throw SpecError("drone " + std::to_string(spec.drones[i].id) + " is unreachable from the hand");
  }

  if (!spec.polygon_order.empty()) {
    std::vector<int> sorted = spec.polygon_order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != n || sorted[i] != static_cast<int>(i)) {
        throw SpecError("polygon order must be a permutation of all drones");
      }
    }
  }
}

std::vector<Vec3> nominal_slots(const FormationSpec& spec, const Vec3& hand) {
  std::vector<Vec3> slots(spec.size());
  for (int i : anchor_order(spec)) {
    const auto& rule = spec.drones[static_cast<std::size_t>(i)];
    slots[static_cast<std::size_t>(i)] = anchor_position(rule.anchor, hand, slots) + rule.offset;
  }
  return slots;
}

// ---------------------------------------------------------------------------

namespace {

Vec3 raw_difference(const HandSample& oldest, const HandSample& newest) {
  return (newest.position - oldest.position) * (1.0 / (newest.t - oldest.t));
}

}  // namespace

VelocityEstimate estimate_hand_velocity(std::span<const HandSample> history, const VelocityEstimatorConfig& config) {
  HandState state(config);
  for (const auto& s : history) state.ingest(s);
  return {state.velocity(), state.cold()};
}

HandState::HandState(VelocityEstimatorConfig config) : config_(config) {
  if (config_.window < 2) throw ParameterError("window", "must span at least 2 samples");
  if (!(config_.smoothing > 0.0 && config_.smoothing <= 1.0)) throw ParameterError("smoothing", "must be in (0, 1]");
}

void HandState::ingest(const HandSample& sample) {
  if (!std::isfinite(sample.t) || !sample.position.finite()) throw ParameterError("hand_sample", "must be finite");
  if (!history_.empty() && !(sample.t > history_.back().t)) {
    throw ParameterError("hand_sample", "timestamps must be strictly increasing");
  }
  history_.push_back(sample);
  while (history_.size() > config_.window) history_.pop_front();
  position_ = sample.position;
  if (history_.size() < 2) return;

  const Vec3 raw = raw_difference(history_.front(), history_.back());
  if (!have_estimate_) {
    velocity_ = raw;
    have_estimate_ = true;
  } else {
    velocity_ = raw * config_.smoothing + velocity_ * (1.0 - config_.smoothing);
  }
}

void HandState::reset() {
  history_.clear();
  position_ = {};
  velocity_ = {};
  have_estimate_ = false;
}

// ---------------------------------------------------------------------------

ImpedanceNetwork::ImpedanceNetwork(const FormationSpec& spec, double sample_time)
    : links_(spec.links), velocity_gain_(spec.velocity_gain) {
  transitions_.reserve(links_.size());
  for (const auto& link : links_) transitions_.push_back(discretize(link.params, sample_time));
  states_.assign(links_.size(), LinkState{});
  corrections_.assign(links_.size(), Vec3{});
}

const std::vector<Vec3>& ImpedanceNetwork::update_links(const Vec3& hand_velocity) {
  const Vec3 force = external_force(hand_velocity, velocity_gain_);
  for (std::size_t l = 0; l < links_.size(); ++l) {
    Vec3 raw;
    for (int axis = 0; axis < kAxes; ++axis) {
      auto& s = states_[l].axis[static_cast<std::size_t>(axis)];
      s = step(s, force[axis], transitions_[l]);
      raw[axis] = s.displacement;
    }
    corrections_[l] = saturate(raw, links_[l].limits);
  }
  return corrections_;
}

void ImpedanceNetwork::reset() {
  states_.assign(links_.size(), LinkState{});
  corrections_.assign(links_.size(), Vec3{});
}

GoalSet compute_goals(const FormationSpec& spec, const Vec3& hand, std::span<const Vec3> drone_positions,
                      std::span<const Vec3> corrections) {
  const std::size_t n = spec.size();
  std::vector<Vec3> summed(n);
  for (std::size_t l = 0; l < spec.links.size(); ++l) {
    const auto& link = spec.links[l];
    const Vec3& c = corrections[l];
    auto& acc = summed[static_cast<std::size_t>(link.target)];
    acc += Vec3{link.sign.x * c.x, link.sign.y * c.y, link.sign.z * c.z};
  }

  GoalSet out;
  out.goals.resize(n);
  out.corrections.assign(corrections.begin(), corrections.end());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rule = spec.drones[i];
    Vec3 goal = anchor_position(rule.anchor, hand, drone_positions) + rule.offset;
    for (int axis = 0; axis < kAxes; ++axis) {
      if (axis == spec.away_axis) {
        goal[axis] -= std::abs(summed[i][axis]);
      } else {
        goal[axis] += summed[i][axis];
      }
    }
    out.goals[i] = goal;
  }
  return out;
}

}  // namespace swarmguide
