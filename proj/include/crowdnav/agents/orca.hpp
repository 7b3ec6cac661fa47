#pragma once

#include "crowdnav/agents/agent_view.hpp"
#include "crowdnav/agents/linear_program.hpp"
#include "crowdnav/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace crowdnav::agents {

struct OrcaParams {
  double time_horizon = 5.0;   // s
  double neighbor_dist = 10.0; // m
  int max_neighbors = 10;
  double safety_buffer = 0.01; // m, added to every combined radius

  bool operator==(const OrcaParams&) const = default;

  void validate() const {
    if (!(time_horizon > 0.0)) throw InvalidArgument("orca.time_horizon must be > 0");
    if (!(neighbor_dist > 0.0)) throw InvalidArgument("orca.neighbor_dist must be > 0");
    if (max_neighbors < 1) throw InvalidArgument("orca.max_neighbors must be >= 1");
    if (!(safety_buffer > 0.0)) throw InvalidArgument("orca.safety_buffer must be > 0");
  }
};

/// How much of each pairwise avoidance the agent takes on. Humans share it
/// (reciprocal); a robot facing humans that ignore it must take all of it.
enum class Responsibility { Shared, Full };

/// The ORCA half-plane induced on `self` by `other`.
inline HalfPlane orca_halfplane(const AgentView& self, const AgentView& other, const OrcaParams& params,
                                double dt, double share) {
  const double inv_horizon = 1.0 / params.time_horizon;
  const Vec2 rel_pos = other.position - self.position;
  const Vec2 rel_vel = self.velocity - other.velocity;
  const double dist_sq = rel_pos.squaredNorm();
  const double combined = self.radius + other.radius + params.safety_buffer;
  const double combined_sq = combined * combined;

  HalfPlane line;
  Vec2 u;
  if (dist_sq > combined_sq) {
    const Vec2 w = rel_vel - inv_horizon * rel_pos;
    const double w_len_sq = w.squaredNorm();
    const double dot1 = w.dot(rel_pos);
    if (dot1 < 0.0 && dot1 * dot1 > combined_sq * w_len_sq) {
      // Project on the cut-off circle.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      line.direction = Vec2(unit_w.y(), -unit_w.x());
      u = (combined * inv_horizon - w_len) * unit_w;
    } else {
      // Project on a leg of the truncated cone.
      const double leg = std::sqrt(dist_sq - combined_sq);
      if (det2(rel_pos, w) > 0.0) {
        line.direction = Vec2(rel_pos.x() * leg - rel_pos.y() * combined,
                              rel_pos.x() * combined + rel_pos.y() * leg) / dist_sq;
      } else {
        line.direction = -Vec2(rel_pos.x() * leg + rel_pos.y() * combined,
                               -rel_pos.x() * combined + rel_pos.y() * leg) / dist_sq;
      }
      u = rel_vel.dot(line.direction) * line.direction - rel_vel;
    }
  } else {
    // Already overlapping: resolve within one step.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = rel_vel - inv_dt * rel_pos;
    const double w_len = w.norm();
    const Vec2 unit_w = w_len > 0.0 ? Vec2(w / w_len) : Vec2(-rel_pos.normalized());
    line.direction = Vec2(unit_w.y(), -unit_w.x());
    u = (combined * inv_dt - w_len) * unit_w;
  }
  line.point = self.velocity + share * u;
  return line;
}

/// Indices of the neighbours ORCA considers: within neighbor_dist, nearest
/// first (ties by index), at most max_neighbors.
inline std::vector<std::size_t> orca_neighbor_order(const AgentView& self, std::span<const AgentView> neighbors,
                                                    const OrcaParams& params) {
  std::vector<std::size_t> order;
  const double range_sq = params.neighbor_dist * params.neighbor_dist;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if ((neighbors[i].position - self.position).squaredNorm() < range_sq) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (neighbors[a].position - self.position).squaredNorm() <
           (neighbors[b].position - self.position).squaredNorm();
  });
  if (order.size() > static_cast<std::size_t>(params.max_neighbors)) order.resize(params.max_neighbors);
  return order;
}

/// Velocity nearest to the preferred velocity that satisfies every ORCA
/// constraint; falls back to the least-violating velocity when infeasible.
inline Vec2 orca_velocity(const AgentView& self, std::span<const AgentView> neighbors, const OrcaParams& params,
                          double dt, Responsibility responsibility = Responsibility::Shared) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const double share = responsibility == Responsibility::Shared ? 0.5 : 1.0;

  std::vector<HalfPlane> lines;
  for (std::size_t idx : orca_neighbor_order(self, neighbors, params)) {
    lines.push_back(orca_halfplane(self, neighbors[idx], params, dt, share));
  }

  const Vec2 preferred = preferred_velocity(self, dt);
  Vec2 result = Vec2::Zero();
  const std::size_t fail = solve_halfplane_lp(lines, self.v_max, preferred, false, result);
  if (fail < lines.size()) solve_least_violation(lines, fail, self.v_max, result);
  return clip_norm(result, self.v_max);
}

}  // namespace crowdnav::agents
