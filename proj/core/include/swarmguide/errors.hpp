#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swarmguide {

/// Invalid numeric parameter. `field()` names the offending input.
class ParameterError : public std::invalid_argument {
 public:
  ParameterError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Structurally invalid formation or scenario (unreachable drone, cycle, degenerate default shape).
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario file failed validation. Carries every violation found, not only the first.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "scenario invalid:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// A query point lies inside an obstacle's safety zone.
class PenetrationError : public std::runtime_error {
 public:
  explicit PenetrationError(std::size_t obstacle_index)
      : std::runtime_error("point inside safety zone of obstacle #" + std::to_string(obstacle_index)),
        obstacle_index_(obstacle_index) {}

  [[nodiscard]] std::size_t obstacle_index() const noexcept { return obstacle_index_; }

 private:
  std::size_t obstacle_index_;
};

/// Non-finite value produced during a tick.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::string stage, int drone_id)
      : std::runtime_error("non-finite value at stage '" + stage + "'" +
                           (drone_id >= 0 ? " for drone " + std::to_string(drone_id) : std::string{})),
        stage_(std::move(stage)),
        drone_id_(drone_id) {}

  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
  [[nodiscard]] int drone_id() const noexcept { return drone_id_; }

 private:
  std::string stage_;
  int drone_id_;
};

/// Malformed hand trace or trace log file.
class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarmguide
