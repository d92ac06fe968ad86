#pragma once

// Mass-spring-damper interlink model, one scalar instance per axis:
//
//   M dd(dx) + D d(dx) + K dx = F
//
// stepped exactly under zero-order hold: s[k+1] = A_d s[k] + B_d F[k].

#include <array>
#include <complex>
#include <string_view>

#include "swarmguide/vec.hpp"

namespace swarmguide {

enum class DampingClass { Undamped, Underdamped, Critical, Overdamped };

[[nodiscard]] std::string_view to_string(DampingClass c);

/// Tolerance on |zeta - 1| for the Critical tag.
inline constexpr double kCriticalTolerance = 1e-6;

struct ImpedanceParams {
  double mass = 1.0;       // kg (virtual)
  double damping = 2.0;    // N s / m
  double stiffness = 1.0;  // N / m

  double natural_frequency = 1.0;  // rad/s
  double damping_ratio = 1.0;
  std::complex<double> lambda1{-1.0, 0.0};
  std::complex<double> lambda2{-1.0, 0.0};
  // Companion-form constants: A = [[0, 1], [b, a]], B = [0, c].
  double a = -2.0;
  double b = -1.0;
  double c = 1.0;
  DampingClass damping_class = DampingClass::Critical;

  [[nodiscard]] bool complex_eigenvalues() const { return lambda1.imag() != 0.0; }
  /// Within 1% of critical damping, whatever the exact tag.
  [[nodiscard]] bool near_critical() const { return std::abs(damping_ratio - 1.0) <= 1e-2; }
};

/// Validates and derives. Throws ParameterError naming "mass", "damping" or "stiffness".
[[nodiscard]] ImpedanceParams make_impedance_params(double mass, double damping, double stiffness);

struct Mat2 {
  // Row-major.
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  [[nodiscard]] constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 2 + c)]; }
  [[nodiscard]] constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 2 + c)]; }
};

struct StateTransition {
  Mat2 ad;
  std::array<double, 2> bd{0.0, 0.0};
  double sample_time = 0.0;
};

/// Exact ZOH discretization. Repeated and distinct real roots use closed forms;
/// complex roots use a Pade matrix exponential. Throws ParameterError on T <= 0.
[[nodiscard]] StateTransition discretize(const ImpedanceParams& params, double sample_time);

struct ImpedanceState {
  double displacement = 0.0;  // m
  double velocity = 0.0;      // m/s

  friend constexpr bool operator==(const ImpedanceState&, const ImpedanceState&) = default;
};

/// Hand-velocity forcing: F = K_v * v.
[[nodiscard]] constexpr double external_force(double hand_velocity, double velocity_gain) {
  return velocity_gain * hand_velocity;
}

[[nodiscard]] constexpr Vec3 external_force(const Vec3& hand_velocity, double velocity_gain) {
  return hand_velocity * velocity_gain;
}

[[nodiscard]] constexpr ImpedanceState step(const ImpedanceState& s, double force, const StateTransition& tr) {
  return {tr.ad(0, 0) * s.displacement + tr.ad(0, 1) * s.velocity + tr.bd[0] * force,
          tr.ad(1, 0) * s.displacement + tr.ad(1, 1) * s.velocity + tr.bd[1] * force};
}

struct SaturationLimits {
  Vec3 limit{0.25, 0.25, 0.25};  // m, per axis, >= 0
};

[[nodiscard]] double saturate(double correction, double limit);
[[nodiscard]] Vec3 saturate(const Vec3& correction, const SaturationLimits& limits);

/// Three independent scalar models (x, y, z) for one interlink.
struct LinkState {
  std::array<ImpedanceState, 3> axis{};
};

}  // namespace swarmguide
