#pragma once

// Low-dimensional linear programs over half-planes inside a speed disk, used by
// ORCA to pick the admissible velocity nearest to a preferred one. Incremental
// 1D/2D solves with a 3D fallback that minimises the largest violation when
// the half-planes have empty intersection.

#include "crowdnav/math.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace crowdnav::agents {

/// Directed line; admissible velocities lie to its left.
struct HalfPlane {
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();
};

namespace lp_detail {

inline constexpr double kEpsilon = 1e-5;

/// Optimises along constraint `line_no`, respecting constraints [0, line_no).
inline bool solve_on_line(std::span<const HalfPlane> lines, std::size_t line_no, double radius,
                          const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  const HalfPlane& line = lines[line_no];
  const double dot = line.point.dot(line.direction);
  const double discriminant = dot * dot + radius * radius - line.point.squaredNorm();
  if (discriminant < 0.0) return false;  // disk misses the line entirely

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot - sqrt_disc;
  double t_right = -dot + sqrt_disc;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = det2(line.direction, lines[i].direction);
    const double numerator = det2(lines[i].direction, line.point - lines[i].point);
    if (std::abs(denominator) <= kEpsilon) {
      if (numerator < 0.0) return false;  // parallel and on the wrong side
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = line.point + (opt_velocity.dot(line.direction) > 0.0 ? t_right : t_left) * line.direction;
  } else {
    const double t = line.direction.dot(opt_velocity - line.point);
    result = line.point + std::clamp(t, t_left, t_right) * line.direction;
  }
  return true;
}

}  // namespace lp_detail

/// Closest point to `opt_velocity` (or furthest along it when `direction_opt`)
/// inside the disk of `radius` and all half-planes. Returns lines.size() on
/// success, otherwise the index of the first constraint that could not be met;
/// `result` then holds the best point found before that constraint.
inline std::size_t solve_halfplane_lp(std::span<const HalfPlane> lines, double radius,
                                      const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;
  } else if (opt_velocity.squaredNorm() > radius * radius) {
    result = opt_velocity.normalized() * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (det2(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!lp_detail::solve_on_line(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

/// Fallback for infeasible programs: starting at `begin_line`, minimises the
/// maximum signed distance by which `result` violates any half-plane.
inline void solve_least_violation(std::span<const HalfPlane> lines, std::size_t begin_line,
                                  double radius, Vec2& result) {
  double distance = 0.0;
  std::vector<HalfPlane> projected;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (det2(lines[i].direction, lines[i].point - result) <= distance) continue;

    projected.clear();
    for (std::size_t j = 0; j < i; ++j) {
      HalfPlane line;
      const double determinant = det2(lines[i].direction, lines[j].direction);
      if (std::abs(determinant) <= lp_detail::kEpsilon) {
        if (lines[i].direction.dot(lines[j].direction) > 0.0) continue;  // same direction
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (det2(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }
      line.direction = (lines[j].direction - lines[i].direction).normalized();
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 outward(-lines[i].direction.y(), lines[i].direction.x());
    if (solve_halfplane_lp(projected, radius, outward, true, result) < projected.size()) {
      // Only reachable through floating-point error; keep the previous point.
      result = previous;
    }
    distance = det2(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace crowdnav::agents
