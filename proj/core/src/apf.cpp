#include "swarmguide/apf.hpp"

#include <cmath>
#include <limits>

#include "swarmguide/errors.hpp"

namespace swarmguide {

void validate(const Obstacle& obstacle) {
  if (!(obstacle.radius > 0.0) || !std::isfinite(obstacle.radius)) {
    throw ParameterError("radius", "obstacle '" + obstacle.id + "' needs r > 0");
  }
  if (!(obstacle.influence > obstacle.radius) || !std::isfinite(obstacle.influence)) {
    throw ParameterError("influence", "obstacle '" + obstacle.id + "' needs d0 > r");
  }
  if (!std::isfinite(obstacle.center.x) || !std::isfinite(obstacle.center.y)) {
    throw ParameterError("center", "obstacle '" + obstacle.id + "' center not finite");
  }
}

void validate(const ApfGains& gains) {
  if (!(gains.xi > 0.0)) throw ParameterError("xi", "must be > 0");
  if (!(gains.eta > 0.0)) throw ParameterError("eta", "must be > 0");
  if (!(gains.velocity_gain > 0.0)) throw ParameterError("velocity_gain", "must be > 0");
  if (!(gains.max_speed > 0.0)) throw ParameterError("max_speed", "must be > 0");
}

Potential attractive_potential(const Vec2& p, const Vec2& goal, double xi) {
  const Vec2 d = p - goal;
  return {xi * d.squared_norm(), d * (2.0 * xi)};
}

double boundary_distance(const Vec2& p, const Obstacle& obstacle) {
  return (p - obstacle.center).norm() - obstacle.radius;
}

std::optional<std::size_t> penetrated_obstacle(const Vec2& p, std::span<const Obstacle> obstacles) {
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (boundary_distance(p, obstacles[i]) <= 0.0) return i;
  }
  return std::nullopt;
}

namespace {

Potential single_repulsive(const Vec2& p, const Obstacle& o, double eta) {
  const Vec2 d = p - o.center;
  const double dist = d.norm();
  const double rho = dist - o.radius;
  if (rho >= o.influence) return {};
  const double inv = 1.0 / rho - 1.0 / o.influence;
  // dU/drho = -2 eta inv / rho^2, grad rho = d / |d|
  const double dudrho = -2.0 * eta * inv / (rho * rho);
  return {eta * inv * inv, d * (dudrho / dist)};
}

}  // namespace

Potential repulsive_potential(const Vec2& p, std::span<const Obstacle> obstacles, double eta, bool sum_all) {
  if (auto hit = penetrated_obstacle(p, obstacles)) throw PenetrationError(*hit);
  if (obstacles.empty()) return {};
  if (sum_all) {
    Potential total;
    for (const auto& o : obstacles) {
      const Potential u = single_repulsive(p, o, eta);
      total.value += u.value;
      total.gradient += u.gradient;
    }
    return total;
  }
  std::size_t closest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const double rho = boundary_distance(p, obstacles[i]);
    if (rho < best) {
      best = rho;
      closest = i;
    }
  }
  return single_repulsive(p, obstacles[closest], eta);
}

Vec2 clamp_magnitude(const Vec2& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm) return v;
  return v * (max_norm / n);
}

Vec2 avoidance_velocity(const Vec2& p, const Vec2& goal, std::span<const Obstacle> obstacles, const ApfGains& gains) {
  const Potential ua = attractive_potential(p, goal, gains.xi);
  const Potential ur = repulsive_potential(p, obstacles, gains.eta, gains.sum_all);
  return clamp_magnitude((ua.gradient + ur.gradient) * -gains.velocity_gain, gains.max_speed);
}

Vec2 repulsive_velocity(const Vec2& p, std::span<const Obstacle> obstacles, const ApfGains& gains) {
  const Potential ur = repulsive_potential(p, obstacles, gains.eta, gains.sum_all);
  return clamp_magnitude(ur.gradient * -gains.velocity_gain, gains.max_speed);
}

}  // namespace swarmguide
