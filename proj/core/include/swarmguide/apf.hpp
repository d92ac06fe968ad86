#pragma once

// Planar artificial potential field.
//
//   U_a = xi |p - p_g|^2
//   U_r = eta (1/rho - 1/d0)^2   for rho < d0, else 0
//
// rho is measured from the safety-zone boundary: rho = |p - center| - r.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmguide/vec.hpp"

namespace swarmguide {

struct Obstacle {
  std::string id;
  Vec2 center;
  double radius = 0.3;     // safety radius r, m
  double influence = 0.8;  // d0, compared against rho; must exceed r
};

struct ApfGains {
  double xi = 1.0;
  double eta = 0.1;
  double velocity_gain = 1.0;  // m/s per unit gradient
  double max_speed = 1.0;      // m/s
  bool sum_all = false;        // false: closest obstacle only
};

/// Throws ParameterError when r <= 0 or d0 <= r.
void validate(const Obstacle& obstacle);
/// Throws ParameterError unless every gain is > 0.
void validate(const ApfGains& gains);

struct Potential {
  double value = 0.0;
  Vec2 gradient;
};

[[nodiscard]] Potential attractive_potential(const Vec2& p, const Vec2& goal, double xi);

/// Distance from p to the boundary of the obstacle's safety zone.
[[nodiscard]] double boundary_distance(const Vec2& p, const Obstacle& obstacle);

/// Repulsive field of the closest obstacle (or the sum when gains.sum_all).
/// Throws PenetrationError carrying the obstacle index when p is inside a safety zone.
[[nodiscard]] Potential repulsive_potential(const Vec2& p, std::span<const Obstacle> obstacles, double eta,
                                            bool sum_all = false);

/// Index of the first obstacle whose safety zone contains p.
[[nodiscard]] std::optional<std::size_t> penetrated_obstacle(const Vec2& p, std::span<const Obstacle> obstacles);

/// v = -k (grad U_a + grad U_r), magnitude clamped to max_speed.
[[nodiscard]] Vec2 avoidance_velocity(const Vec2& p, const Vec2& goal, std::span<const Obstacle> obstacles,
                                      const ApfGains& gains);

/// Repulsive part only: v = -k grad U_r, clamped.
[[nodiscard]] Vec2 repulsive_velocity(const Vec2& p, std::span<const Obstacle> obstacles, const ApfGains& gains);

[[nodiscard]] Vec2 clamp_magnitude(const Vec2& v, double max_norm);

}  // namespace swarmguide
