#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace crowdnav {

using Vec2 = Eigen::Vector2d;

inline double det2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Rescales v so that |v| <= max_norm; returns v untouched when already inside.
inline Vec2 clip_norm(const Vec2& v, double max_norm) {
  const double n = v.norm();
  if (n > max_norm) return (v / n) * max_norm;
  return v;
}

}  // namespace crowdnav
