#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmguide/apf.hpp"
#include "swarmguide/formation.hpp"
#include "swarmguide/tactile.hpp"

namespace swarmguide {

inline constexpr int kScenarioSchemaVersion = 1;

struct PidAxisGains {
  double kp = 8.0;
  double kd = 5.0;
  double ki = 0.4;
};

// Crazyflie 2.0 firmware defaults are xy kp=40 kd=20 ki=2, z kp=5000 kd=6000 ki=3500.
// Those are in firmware units and do not transfer to a point mass; the defaults
// below are tuned for the point-mass model instead.
struct PidGains {
  PidAxisGains xy;
  PidAxisGains z;
  double max_accel = 4.0;         // m/s^2, clamp on the output magnitude
  double integrator_limit = 0.1;  // m s, per axis
};

struct SafetyThresholds {
  double min_separation = 0.15;  // d_min between drones, m
};

struct FinishRegion {
  Vec2 min;
  Vec2 max;

  [[nodiscard]] bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  double sample_time = 1.0 / 60.0;

  FormationSpec formation;
  VelocityEstimatorConfig hand_estimator;

  std::vector<Obstacle> obstacles;  // the active layout
  std::map<std::string, std::vector<Obstacle>> layouts;
  std::string layout;

  ApfGains apf;
  bool avoidance_enabled = true;
  /// The repulsive velocity is integrated into a per-drone goal offset that
  /// relaxes back to zero with this time constant once clear of obstacles.
  double avoidance_relaxation_s = 0.5;

  PidGains pid;
  double max_speed = 1.0;  // per-drone speed limit, m/s

  TactileConfig tactile;
  SafetyThresholds safety;

  Vec3 start_hand{0.0, 0.0, 1.0};
  std::optional<std::string> hand_trace;  // as written; resolved against base_dir
  std::filesystem::path base_dir;         // directory of the scenario file, not serialized
  std::optional<double> duration_s;
  std::optional<FinishRegion> finish;

  /// Switches the active obstacle layout. Throws ScenarioError on an unknown name.
  void select_layout(const std::string& name);

  [[nodiscard]] std::optional<std::filesystem::path> hand_trace_path() const;
};

/// Parses and validates. Collects every violation and throws ScenarioError with all of them.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Canonical form: defaults filled in, keys sorted.
[[nodiscard]] nlohmann::json to_json(const Scenario& scenario);
[[nodiscard]] std::string canonical_serialization(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical serialization.
[[nodiscard]] std::string scenario_hash(const Scenario& scenario);

}  // namespace swarmguide
