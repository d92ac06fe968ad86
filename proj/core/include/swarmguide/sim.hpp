#pragma once

// Fixed-step world simulator. One tick runs, in this order:
//
//   1. ingest the hand sample and update the velocity estimate
//   2. step every impedance link
//   3. compute formation goals
//   4. add the obstacle-avoidance offset to each goal
//   5. position PID per drone
//   6. semi-implicit Euler: v += a T (speed-clamped), p += v T
//   7. detect events (collision, formation change, patterns, finish)
//   8. append the trace row

#include <optional>
#include <span>
#include <vector>

#include "swarmguide/formation.hpp"
#include "swarmguide/scenario.hpp"
#include "swarmguide/tactile.hpp"
#include "swarmguide/trace.hpp"

namespace swarmguide {

struct DroneState {
  int id = 0;
  Vec3 position;
  Vec3 velocity;
  Vec3 integrator;
  Vec3 previous_error;
  bool has_previous_error = false;
  Vec2 avoidance_offset;
};

struct PidOutput {
  Vec3 acceleration;
  Vec3 integrator;  // updated, clamped
  Vec3 error;
};

/// a = kp e + kd de/dt + ki integral(e). de/dt comes from successive errors and is
/// zero on the first call. Integrator clamped per axis, output clamped in magnitude.
[[nodiscard]] PidOutput pid_track(const DroneState& drone, const Vec3& goal, const PidGains& gains,
                                  double sample_time);

/// Applies a PID output to the drone's controller memory.
void commit(DroneState& drone, const PidOutput& out);

/// Semi-implicit Euler: v += a T, clamp |v| to max_speed, then p += v T.
void integrate(DroneState& drone, const Vec3& acceleration, double max_speed, double sample_time);

/// Immutable copy of the world between ticks.
struct WorldSnapshot {
  long tick = 0;
  double t = 0.0;
  Vec3 hand;
  Vec3 hand_velocity;
  std::vector<DroneState> drones;
  std::vector<Vec3> goals;
  Vec2 centroid;
  FormationLabel label = FormationLabel::Regular;
  std::optional<PatternId> active_pattern;
  bool finished = false;
};

class Simulator {
 public:
  /// Drones start at their nominal slots around `initial_hand`; the estimator
  /// is seeded with that pose at t = 0.
  Simulator(Scenario scenario, const Vec3& initial_hand, unsigned long seed = 0);
  explicit Simulator(Scenario scenario) : Simulator(scenario, scenario.start_hand) {}

  /// Advances one tick to t = (tick + 1) T with the hand at `hand`.
  /// Throws SimulationError on a non-finite value.
  const TickRecord& step(const Vec3& hand);

  [[nodiscard]] long tick() const { return tick_; }
  [[nodiscard]] double time() const { return static_cast<double>(tick_) * scenario_.sample_time; }
  [[nodiscard]] const Scenario& scenario() const { return scenario_; }
  [[nodiscard]] const std::vector<DroneState>& drones() const { return drones_; }
  [[nodiscard]] const TraceLog& trace() const { return trace_; }
  [[nodiscard]] TraceLog take_trace() { return std::move(trace_); }
  [[nodiscard]] bool finished() const { return finished_; }
  [[nodiscard]] const FormationReference& reference() const { return tactile_.reference(); }
  [[nodiscard]] WorldSnapshot snapshot() const;
  /// Events appended by the most recent step.
  [[nodiscard]] std::span<const SimEvent> last_events() const;

 private:
  void check(const Vec3& v, const char* stage, int drone_id) const;

  Scenario scenario_;
  HandState hand_;
  ImpedanceNetwork network_;
  TactileEngine tactile_;
  std::vector<DroneState> drones_;
  std::vector<Vec3> goals_;
  TraceLog trace_;
  long tick_ = 0;
  bool finished_ = false;
  std::size_t events_before_step_ = 0;
};

/// Header metadata shared by headless and live logs.
[[nodiscard]] nlohmann::json trace_header(const Scenario& scenario, const FormationReference& reference,
                                          unsigned long seed);

struct RunOptions {
  std::optional<long> ticks;  // otherwise duration_s, otherwise the end of the hand trace
  unsigned long seed = 0;
};

/// Tick count a run will use.
[[nodiscard]] long planned_ticks(const Scenario& scenario, const HandTrace& hand_trace, const RunOptions& options);

/// Headless replay. The hand trace is resampled at t = k T; with an empty trace the
/// hand holds the scenario's start pose.
[[nodiscard]] TraceLog run_scenario(const Scenario& scenario, const HandTrace& hand_trace,
                                    const RunOptions& options = {});

}  // namespace swarmguide
