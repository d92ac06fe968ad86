#pragma once

// Formation-state classification and vibrotactile guidance patterns.
//
// Fingers are numbered 1..5 thumb to little finger of a right hand seen from
// the dorsal side, so finger 1 is on the operator's left and finger 5 on the
// right. Intensity is expressed as an actuator frequency level in Hz.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmguide/vec.hpp"

namespace swarmguide {

enum class FormationLabel { Contracted, Regular, Extended };

[[nodiscard]] std::string_view to_string(FormationLabel label);

/// Shoelace area of the XY projection, vertices taken in `order` (empty: as given).
[[nodiscard]] double polygon_area(std::span<const Vec3> positions, std::span<const int> order = {});

/// Default geometry the classifier compares against. Distances are planar (XY).
struct FormationReference {
  std::vector<double> pair_distances;  // (0,1), (0,2), ..., (1,2), ...
  double area = 0.0;                   // used when N >= 3
  std::vector<int> polygon_order;
  std::size_t drone_count = 0;
};

/// Throws SpecError on coincident default drones or, for N >= 3, zero default area.
[[nodiscard]] FormationReference make_reference(std::span<const Vec3> default_positions,
                                                std::vector<int> polygon_order = {});

struct ClassifierThresholds {
  double threshold = 0.10;   // theta
  double hysteresis = 0.02;  // a non-Regular label holds until ratios return within theta - hysteresis
};

struct FormationStateLabel {
  FormationLabel label = FormationLabel::Regular;
  double area = 0.0;
  double area_ratio = 1.0;
  std::vector<double> pair_ratios;
};

/// Extended if the area or any pair distance exceeds (1 + theta) of default, Contracted
/// if below (1 - theta), otherwise Regular. When both fire, the larger deviation wins.
/// `previous` drives the exit hysteresis.
[[nodiscard]] FormationStateLabel classify_formation_state(std::span<const Vec3> positions,
                                                           const FormationReference& reference,
                                                           const ClassifierThresholds& thresholds,
                                                           FormationLabel previous = FormationLabel::Regular);

[[nodiscard]] Vec2 planar_centroid(std::span<const Vec3> positions);

/// Signed lateral offset of `centroid` from `reference` relative to `motion_direction`.
/// Positive means right of the direction of motion. `motion_direction` must be non-zero.
[[nodiscard]] double com_displacement(const Vec2& centroid, const Vec2& reference, const Vec2& motion_direction);

/// Holds the last motion direction whose speed exceeded epsilon.
class DirectionTracker {
 public:
  explicit DirectionTracker(double epsilon = 0.05) : epsilon_(epsilon) {}

  /// Returns the displacement, or nullopt while no valid direction has ever been seen.
  std::optional<double> update(const Vec2& centroid, const Vec2& reference, const Vec2& motion_velocity);
  void reset() { direction_.reset(); }
  [[nodiscard]] const std::optional<Vec2>& direction() const { return direction_; }

 private:
  double epsilon_;
  std::optional<Vec2> direction_;
};

// ---------------------------------------------------------------------------

enum class PatternId { EI, ED, RI, RD, CI, CD, R, L, CR, CL, ER, EL };

inline constexpr std::array<PatternId, 12> kAllPatterns{PatternId::EI, PatternId::ED, PatternId::RI, PatternId::RD,
                                                        PatternId::CI, PatternId::CD, PatternId::R,  PatternId::L,
                                                        PatternId::CR, PatternId::CL, PatternId::ER, PatternId::EL};
inline constexpr std::array<PatternId, 8> kStatePatterns{PatternId::EI, PatternId::ED, PatternId::RI, PatternId::RD,
                                                         PatternId::CI, PatternId::CD, PatternId::R,  PatternId::L};

[[nodiscard]] std::string_view to_string(PatternId id);
/// Throws std::invalid_argument on an unknown id.
[[nodiscard]] PatternId parse_pattern_id(std::string_view text);

inline constexpr int kFingers = 5;
inline constexpr int kLowHz = 150;
inline constexpr int kMidHz = 200;
inline constexpr int kHighHz = 250;

using FingerLevels = std::array<int, kFingers>;  // Hz per finger, 0 = off

struct TactileFrame {
  FingerLevels levels{};
  int duration_ms = 0;

  friend bool operator==(const TactileFrame&, const TactileFrame&) = default;
};

struct TactilePattern {
  PatternId id = PatternId::R;
  std::vector<TactileFrame> frames;

  [[nodiscard]] int total_ms() const;
};

[[nodiscard]] TactilePattern encode_pattern(PatternId id);

/// Actuator levels `elapsed_ms` into a pattern; all zero outside it or with no pattern.
[[nodiscard]] FingerLevels levels_at(const std::optional<TactilePattern>& pattern, int elapsed_ms);

[[nodiscard]] nlohmann::json to_json(const TactilePattern& pattern);
/// One line per active finger per frame: `start_ms,finger,frequency_hz,duration_ms`.
[[nodiscard]] std::string to_device_lines(const TactilePattern& pattern);

// ---------------------------------------------------------------------------

struct SelectorConfig {
  double deadband = 0.05;  // m
  int cooldown_ms = 300;
};

/// Guidance truth table. Contracted: recommend moving with the displacement (CR/CL).
/// Extended: recommend moving against it (EL for a right shift, ER for a left one).
/// Inside the dead-band the sign falls back to `last_sign`, then to the raw sign.
[[nodiscard]] std::optional<PatternId> select_pattern(FormationLabel label, std::optional<double> displacement,
                                                      int last_sign, const SelectorConfig& config);

struct PatternEvent {
  PatternId id = PatternId::CR;
  long start_tick = 0;
  long end_tick = 0;  // exclusive
  FormationLabel label = FormationLabel::Regular;
  int displacement_sign = 0;
};

struct TactileConfig {
  ClassifierThresholds thresholds;
  SelectorConfig selector;
  double direction_epsilon = 0.05;  // m/s
};

/// Tick-driven classifier + selector + single-glove playback scheduler.
class TactileEngine {
 public:
  TactileEngine(FormationReference reference, TactileConfig config, double sample_time);

  struct Output {
    FormationStateLabel state;
    std::optional<double> displacement;
    std::optional<PatternId> active;
    bool label_changed = false;
    std::optional<PatternEvent> started;
    std::optional<PatternEvent> ended;
  };

  Output update(long tick, std::span<const Vec3> positions, const Vec2& reference_centroid,
                const Vec2& motion_velocity);
  void reset();

  [[nodiscard]] long ticks_for(int duration_ms) const;
  [[nodiscard]] FormationLabel label() const { return label_; }
  [[nodiscard]] const FormationReference& reference() const { return reference_; }

 private:
  FormationReference reference_;
  TactileConfig config_;
  double sample_time_;
  FormationLabel label_ = FormationLabel::Regular;
  DirectionTracker direction_;
  int last_sign_ = 0;
  std::optional<PatternEvent> playing_;
  long next_allowed_tick_ = 0;
};

}  // namespace swarmguide
