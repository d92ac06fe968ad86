#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "swarmguide/impedance.hpp"
#include "swarmguide/vec.hpp"

namespace swarmguide {

/// Link-graph node index of the operator's hand. Drones are 0..N-1.
inline constexpr int kHandNode = -1;

enum class AnchorKind { Hand, Drone, Midpoint };

/// Where a drone's geometric slot hangs from. Drone anchors use actual positions.
struct Anchor {
  AnchorKind kind = AnchorKind::Hand;
  int first = -1;
  int second = -1;
};

struct DroneRule {
  int id = 0;  // external id used in files and on the wire
  Anchor anchor;
  Vec3 offset;
};

struct LinkSpec {
  int source = kHandNode;  // kHandNode or drone index
  int target = 0;          // drone index
  ImpedanceParams params;
  SaturationLimits limits;
  Vec3 sign{1.0, 1.0, 1.0};
};

struct FormationSpec {
  std::vector<DroneRule> drones;
  std::vector<LinkSpec> links;
  double velocity_gain = -7.0;  // K_v, N s / m
  /// Axis on which the summed correction is subtracted as an absolute value
  /// (the formation always spreads away from the operator along it).
  int away_axis = 0;
  /// Vertex order for polygon area; empty means drone order.
  std::vector<int> polygon_order;

  [[nodiscard]] std::size_t size() const { return drones.size(); }
  [[nodiscard]] int index_of(int drone_id) const;
};

/// Throws SpecError when the link graph is not a DAG rooted at the hand covering
/// every drone, anchors are cyclic, offsets are non-finite or the polygon order is bad.
void validate(const FormationSpec& spec);

/// Default slot positions for a hand pose, chaining offsets through nominal anchors.
[[nodiscard]] std::vector<Vec3> nominal_slots(const FormationSpec& spec, const Vec3& hand);

// ---------------------------------------------------------------------------
// Hand velocity estimation

struct HandSample {
  double t = 0.0;
  Vec3 position;
};

struct VelocityEstimatorConfig {
  std::size_t window = 6;  // samples spanned by the backward difference
  double smoothing = 0.5;  // EMA weight of the newest raw estimate
};

struct VelocityEstimate {
  Vec3 velocity;
  bool cold = true;  // fewer than two samples seen
};

/// Pure replay of the estimator over a whole history.
[[nodiscard]] VelocityEstimate estimate_hand_velocity(std::span<const HandSample> history,
                                                      const VelocityEstimatorConfig& config);

/// Incremental estimator; feeding samples one by one matches estimate_hand_velocity().
class HandState {
 public:
  explicit HandState(VelocityEstimatorConfig config = {});

  /// Timestamps must be strictly increasing (ParameterError otherwise).
  void ingest(const HandSample& sample);
  void reset();

  [[nodiscard]] const Vec3& position() const { return position_; }
  [[nodiscard]] const Vec3& velocity() const { return velocity_; }
  [[nodiscard]] bool cold() const { return !have_estimate_; }
  [[nodiscard]] const std::deque<HandSample>& history() const { return history_; }
  [[nodiscard]] const VelocityEstimatorConfig& config() const { return config_; }

 private:
  VelocityEstimatorConfig config_;
  std::deque<HandSample> history_;
  Vec3 position_;
  Vec3 velocity_;
  bool have_estimate_ = false;
};

// ---------------------------------------------------------------------------
// Impedance network and goals

struct GoalSet {
  std::vector<Vec3> goals;        // per drone
  std::vector<Vec3> corrections;  // per link, already saturated
};

/// Owns the per-link impedance states. One owner steps it once per tick.
class ImpedanceNetwork {
 public:
  ImpedanceNetwork(const FormationSpec& spec, double sample_time);

  /// F = K_v v_h on every link and axis, exact step, then saturation.
  /// Returns the emitted (saturated) corrections, one per link.
  const std::vector<Vec3>& update_links(const Vec3& hand_velocity);

  void reset();

  [[nodiscard]] const std::vector<LinkState>& states() const { return states_; }
  [[nodiscard]] const std::vector<Vec3>& corrections() const { return corrections_; }
  [[nodiscard]] const std::vector<StateTransition>& transitions() const { return transitions_; }

 private:
  std::vector<LinkSpec> links_;
  double velocity_gain_;
  std::vector<StateTransition> transitions_;
  std::vector<LinkState> states_;
  std::vector<Vec3> corrections_;
};

/// Geometric part (anchor + offset) composed with the summed incoming link corrections.
/// Pure function of its inputs.
[[nodiscard]] GoalSet compute_goals(const FormationSpec& spec, const Vec3& hand,
                                    std::span<const Vec3> drone_positions, std::span<const Vec3> corrections);

}  // namespace swarmguide
