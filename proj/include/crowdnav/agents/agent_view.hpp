#pragma once

#include "crowdnav/math.hpp"

namespace crowdnav::agents {

/// What a velocity controller needs to know about one agent.
struct AgentView {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double radius = 0.3;
  double v_max = 1.0;
  Vec2 goal = Vec2::Zero();
  /// Preferred velocity is zero regardless of goal (static group members).
  bool holds_position = false;
};

/// Full-speed heading to the goal, shortened when the goal is reachable within one step.
inline Vec2 preferred_velocity(const AgentView& agent, double dt) {
  if (agent.holds_position) return Vec2::Zero();
  const Vec2 to_goal = agent.goal - agent.position;
  const double dist = to_goal.norm();
  if (dist <= 0.0) return Vec2::Zero();
  if (dist <= agent.v_max * dt) return to_goal / dt;
  return (to_goal / dist) * agent.v_max;
}

}  // namespace crowdnav::agents
