#include "swarmguide/impedance.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <unsupported/Eigen/MatrixFunctions>

#include "swarmguide/errors.hpp"

namespace swarmguide {

std::string_view to_string(DampingClass c) {
  switch (c) {
    case DampingClass::Undamped: return "undamped";
    case DampingClass::Underdamped: return "underdamped";
    case DampingClass::Critical: return "critical";
    case DampingClass::Overdamped: return "overdamped";
  }
  return "unknown";
}

ImpedanceParams make_impedance_params(double mass, double damping, double stiffness) {
  if (!std::isfinite(mass) || mass <= 0.0) throw ParameterError("mass", "must be finite and > 0");
  if (!std::isfinite(damping) || damping < 0.0) throw ParameterError("damping", "must be finite and >= 0");
  if (!std::isfinite(stiffness) || stiffness <= 0.0) throw ParameterError("stiffness", "must be finite and > 0");

  ImpedanceParams p;
  p.mass = mass;
  p.damping = damping;
  p.stiffness = stiffness;
  p.natural_frequency = std::sqrt(stiffness / mass);
  p.damping_ratio = damping / (2.0 * std::sqrt(mass * stiffness));
  p.a = -damping / mass;
  p.b = -stiffness / mass;
  p.c = 1.0 / mass;

  // Characteristic polynomial of A: l^2 - a l - b = 0.
  const double disc = p.a * p.a + 4.0 * p.b;
  const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
  p.lambda1 = (p.a + root) / 2.0;
  p.lambda2 = (p.a - root) / 2.0;

  if (damping == 0.0) {
    p.damping_class = DampingClass::Undamped;
  } else if (std::abs(p.damping_ratio - 1.0) <= kCriticalTolerance) {
    p.damping_class = DampingClass::Critical;
  } else if (p.damping_ratio < 1.0) {
    p.damping_class = DampingClass::Underdamped;
  } else {
    p.damping_class = DampingClass::Overdamped;
  }
  return p;
}

namespace {

Mat2 companion(const ImpedanceParams& p) {
  Mat2 a;
  a.m = {0.0, 1.0, p.b, p.a};
  return a;
}

// e^{sT} (c0 I + c1 (A - sI))
Mat2 shifted_form(const ImpedanceParams& p, double shift, double scale, double c0, double c1) {
  const Mat2 a = companion(p);
  Mat2 out;
  out(0, 0) = scale * (c0 + c1 * (a(0, 0) - shift));
  out(0, 1) = scale * (c1 * a(0, 1));
  out(1, 0) = scale * (c1 * a(1, 0));
  out(1, 1) = scale * (c0 + c1 * (a(1, 1) - shift));
  return out;
}

}  // namespace

StateTransition discretize(const ImpedanceParams& params, double sample_time) {
  if (!std::isfinite(sample_time) || sample_time <= 0.0) {
    throw ParameterError("sample_time", "must be finite and > 0");
  }
  const double t = sample_time;
  const double disc = params.a * params.a + 4.0 * params.b;
  const double sigma = params.a / 2.0;

  StateTransition tr;
  tr.sample_time = t;
  if (disc == 0.0) {
    // Repeated root: e^{lT} (I + T (A - lI)).
    tr.ad = shifted_form(params, sigma, std::exp(sigma * t), 1.0, t);
  } else if (disc > 0.0) {
    // Distinct real roots sigma +/- mu; (A - sigma I)^2 = mu^2 I.
    const double mu = std::sqrt(disc) / 2.0;
    const double x = mu * t;
    tr.ad = shifted_form(params, sigma, std::exp(sigma * t), std::cosh(x), std::sinh(x) / mu);
  } else {
    Eigen::Matrix2d a;
    a << 0.0, 1.0, params.b, params.a;
    const Eigen::Matrix2d e = (a * t).exp();
    tr.ad.m = {e(0, 0), e(0, 1), e(1, 0), e(1, 1)};
  }

  // B_d = (A_d - I) A^{-1} B, and A^{-1} B = [c/b, 0]^T.
  const double k = params.c / params.b;
  tr.bd = {(tr.ad(0, 0) - 1.0) * k, tr.ad(1, 0) * k};
  return tr;
}

double saturate(double correction, double limit) { return std::clamp(correction, -limit, limit); }

Vec3 saturate(const Vec3& correction, const SaturationLimits& limits) {
  return {saturate(correction.x, limits.limit.x), saturate(correction.y, limits.limit.y),
          saturate(correction.z, limits.limit.z)};
}

}  // namespace swarmguide
