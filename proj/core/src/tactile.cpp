#include "swarmguide/tactile.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "swarmguide/errors.hpp"

namespace swarmguide {

std::string_view to_string(FormationLabel label) {
  switch (label) {
    case FormationLabel::Contracted: return "contracted";
    case FormationLabel::Regular: return "regular";
    case FormationLabel::Extended: return "extended";
  }
  return "regular";
}

double polygon_area(std::span<const Vec3> positions, std::span<const int> order) {
  const std::size_t n = order.empty() ? positions.size() : order.size();
  if (n < 3) return 0.0;
  auto at = [&](std::size_t k) -> const Vec3& {
    return order.empty() ? positions[k] : positions[static_cast<std::size_t>(order[k])];
  };
  double twice = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& p = at(k);
    const Vec3& q = at((k + 1) % n);
    twice += p.x * q.y - q.x * p.y;
  }
  return std::abs(twice) / 2.0;
}

namespace {

std::vector<double> pair_distances(std::span<const Vec3> positions) {
  std::vector<double> out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      out.push_back((positions[i].xy() - positions[j].xy()).norm());
    }
  }
  return out;
}

}  // namespace

FormationReference make_reference(std::span<const Vec3> default_positions, std::vector<int> polygon_order) {
  FormationReference ref;
  ref.drone_count = default_positions.size();
  ref.pair_distances = pair_distances(default_positions);
  for (double d : ref.pair_distances) {
    if (!(d > 0.0)) throw SpecError("default formation has coincident drones");
  }
  ref.polygon_order = std::move(polygon_order);
  if (ref.drone_count >= 3) {
    ref.area = polygon_area(default_positions, ref.polygon_order);
    if (!(ref.area > 0.0)) throw SpecError("default formation has zero area");
  }
  return ref;
}

FormationStateLabel classify_formation_state(std::span<const Vec3> positions, const FormationReference& reference,
                                             const ClassifierThresholds& thresholds, FormationLabel previous) {
  FormationStateLabel out;
  const auto distances = pair_distances(positions);
  out.pair_ratios.reserve(distances.size());
  for (std::size_t k = 0; k < distances.size() && k < reference.pair_distances.size(); ++k) {
    out.pair_ratios.push_back(distances[k] / reference.pair_distances[k]);
  }

  std::vector<double> ratios = out.pair_ratios;
  if (reference.drone_count >= 3) {
    out.area = polygon_area(positions, reference.polygon_order);
    out.area_ratio = out.area / reference.area;
    ratios.push_back(out.area_ratio);
  }
  if (ratios.empty()) return out;

  const auto [min_it, max_it] = std::minmax_element(ratios.begin(), ratios.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const double theta = thresholds.threshold;

  bool extended = hi > 1.0 + theta;
  bool contracted = lo < 1.0 - theta;
  if (previous == FormationLabel::Extended && hi > 1.0 + theta - thresholds.hysteresis) extended = true;
  if (previous == FormationLabel::Contracted && lo < 1.0 - theta + thresholds.hysteresis) contracted = true;

  if (extended && contracted) {
    out.label = (hi - 1.0) >= (1.0 - lo) ? FormationLabel::Extended : FormationLabel::Contracted;
  } else if (extended) {
    out.label = FormationLabel::Extended;
  } else if (contracted) {
    out.label = FormationLabel::Contracted;
  }
  return out;
}

Vec2 planar_centroid(std::span<const Vec3> positions) {
  Vec2 sum;
  for (const auto& p : positions) sum += p.xy();
  return positions.empty() ? sum : sum * (1.0 / static_cast<double>(positions.size()));
}

double com_displacement(const Vec2& centroid, const Vec2& reference, const Vec2& motion_direction) {
  const Vec2 unit = motion_direction * (1.0 / motion_direction.norm());
  // cross(delta, u) is positive when delta lies to the right of u.
  return cross(centroid - reference, unit);
}

std::optional<double> DirectionTracker::update(const Vec2& centroid, const Vec2& reference,
                                               const Vec2& motion_velocity) {
  const double speed = motion_velocity.norm();
  if (speed > epsilon_) direction_ = motion_velocity * (1.0 / speed);
  if (!direction_) return std::nullopt;
  return com_displacement(centroid, reference, *direction_);
}

// ---------------------------------------------------------------------------

std::string_view to_string(PatternId id) {
  switch (id) {
    case PatternId::EI: return "EI";
    case PatternId::ED: return "ED";
    case PatternId::RI: return "RI";
    case PatternId::RD: return "RD";
    case PatternId::CI: return "CI";
    case PatternId::CD: return "CD";
    case PatternId::R: return "R";
    case PatternId::L: return "L";
    case PatternId::CR: return "CR";
    case PatternId::CL: return "CL";
    case PatternId::ER: return "ER";
    case PatternId::EL: return "EL";
  }
  return "?";
}

PatternId parse_pattern_id(std::string_view text) {
  for (PatternId id : kAllPatterns) {
    if (to_string(id) == text) return id;
  }
  throw std::invalid_argument("unknown pattern id '" + std::string(text) + "'");
}

int TactilePattern::total_ms() const {
  int total = 0;
  for (const auto& f : frames) total += f.duration_ms;
  return total;
}

namespace {

TactileFrame frame(std::initializer_list<int> fingers, int hz, int ms) {
  TactileFrame f;
  for (int finger : fingers) f.levels[static_cast<std::size_t>(finger - 1)] = hz;
  f.duration_ms = ms;
  return f;
}

// Middle-to-outer flow; the stage frequencies set the intensity gradient.
std::vector<TactileFrame> outward(int middle_hz, int inner_hz, int outer_hz) {
  auto ms = [](int hz) { return hz == kHighHz ? 300 : 200; };
  return {frame({3}, middle_hz, ms(middle_hz)), frame({2, 4}, inner_hz, ms(inner_hz)),
          frame({1, 5}, outer_hz, ms(outer_hz))};
}

std::vector<TactileFrame> reversed(std::vector<TactileFrame> frames) {
  std::reverse(frames.begin(), frames.end());
  return frames;
}

}  // namespace

TactilePattern encode_pattern(PatternId id) {
  TactilePattern p;
  p.id = id;
  switch (id) {
    case PatternId::EI: p.frames = outward(kLowHz, kMidHz, kHighHz); break;
    case PatternId::ED: p.frames = reversed(outward(kLowHz, kMidHz, kHighHz)); break;
    case PatternId::RI: p.frames = outward(kMidHz, kMidHz, kMidHz); break;
    case PatternId::RD: p.frames = reversed(outward(kMidHz, kMidHz, kMidHz)); break;
    case PatternId::CI: p.frames = outward(kHighHz, kMidHz, kLowHz); break;
    case PatternId::CD: p.frames = reversed(outward(kHighHz, kMidHz, kLowHz)); break;
    case PatternId::R:
      p.frames = {frame({1}, kMidHz, 200), frame({2}, kMidHz, 200), frame({3}, kMidHz, 200),
                  frame({4}, kMidHz, 200), frame({5}, kMidHz, 200)};
      break;
    case PatternId::L: p.frames = reversed(encode_pattern(PatternId::R).frames); break;
    case PatternId::CR: p.frames = {frame({2}, kMidHz, 200), frame({3}, kMidHz, 200), frame({4}, kMidHz, 200)}; break;
    case PatternId::CL: p.frames = reversed(encode_pattern(PatternId::CR).frames); break;
    case PatternId::ER: p.frames = {frame({5}, kHighHz, 300)}; break;
    case PatternId::EL: p.frames = {frame({1}, kHighHz, 300)}; break;
  }
  return p;
}

FingerLevels levels_at(const std::optional<TactilePattern>& pattern, int elapsed_ms) {
  if (!pattern || elapsed_ms < 0) return {};
  int start = 0;
  for (const auto& f : pattern->frames) {
    if (elapsed_ms < start + f.duration_ms) return f.levels;
    start += f.duration_ms;
  }
  return {};
}

nlohmann::json to_json(const TactilePattern& pattern) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : pattern.frames) {
    frames.push_back({{"levels_hz", f.levels}, {"duration_ms", f.duration_ms}});
  }
  return {{"id", std::string(to_string(pattern.id))}, {"total_ms", pattern.total_ms()}, {"frames", frames}};
}

std::string to_device_lines(const TactilePattern& pattern) {
  std::ostringstream out;
  int start = 0;
  for (const auto& f : pattern.frames) {
    for (int finger = 0; finger < kFingers; ++finger) {
      const int hz = f.levels[static_cast<std::size_t>(finger)];
      if (hz > 0) out << start << ',' << (finger + 1) << ',' << hz << ',' << f.duration_ms << '\n';
    }
    start += f.duration_ms;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

int effective_sign(std::optional<double> displacement, int last_sign, double deadband) {
  if (!displacement) return 0;
  if (std::abs(*displacement) >= deadband) return sign_of(*displacement);
  if (last_sign != 0) return last_sign;
  return sign_of(*displacement);
}

}  // namespace

std::optional<PatternId> select_pattern(FormationLabel label, std::optional<double> displacement, int last_sign,
                                        const SelectorConfig& config) {
  if (label == FormationLabel::Regular) return std::nullopt;
  const int sign = effective_sign(displacement, last_sign, config.deadband);
  if (sign == 0) return std::nullopt;
  const bool right = sign > 0;
  if (label == FormationLabel::Contracted) return right ? PatternId::CR : PatternId::CL;
  return right ? PatternId::EL : PatternId::ER;
}

TactileEngine::TactileEngine(FormationReference reference, TactileConfig config, double sample_time)
    : reference_(std::move(reference)),
      config_(config),
      sample_time_(sample_time),
      direction_(config.direction_epsilon) {
  if (!(sample_time > 0.0)) throw ParameterError("sample_time", "must be > 0");
}

long TactileEngine::ticks_for(int duration_ms) const {
  return static_cast<long>(std::ceil(duration_ms / 1000.0 / sample_time_ - 1e-9));
}

TactileEngine::Output TactileEngine::update(long tick, std::span<const Vec3> positions, const Vec2& reference_centroid,
                                            const Vec2& motion_velocity) {
  Output out;
  if (playing_ && tick >= playing_->end_tick) {
    out.ended = playing_;
    playing_.reset();
  }

  out.state = classify_formation_state(positions, reference_, config_.thresholds, label_);
  out.label_changed = out.state.label != label_;
  label_ = out.state.label;

  out.displacement = direction_.update(planar_centroid(positions), reference_centroid, motion_velocity);
  if (out.displacement && std::abs(*out.displacement) >= config_.selector.deadband) {
    last_sign_ = sign_of(*out.displacement);
  }

  if (!playing_ && tick >= next_allowed_tick_) {
    if (auto id = select_pattern(label_, out.displacement, last_sign_, config_.selector)) {
      const long duration = ticks_for(encode_pattern(*id).total_ms());
      playing_ = PatternEvent{*id, tick, tick + duration, label_,
                              effective_sign(out.displacement, last_sign_, config_.selector.deadband)};
      next_allowed_tick_ = playing_->end_tick + ticks_for(config_.selector.cooldown_ms);
      out.started = playing_;
    }
  }
  if (playing_) out.active = playing_->id;
  return out;
}

void TactileEngine::reset() {
  label_ = FormationLabel::Regular;
  direction_.reset();
  last_sign_ = 0;
  playing_.reset();
  next_allowed_tick_ = 0;
}

}  // namespace swarmguide
