#pragma once

#include "crowdnav/sim/types.hpp"

#include <algorithm>
#include <limits>

namespace crowdnav::sim {

inline constexpr double kCollisionReward = -20.0;
inline constexpr double kGoalReward = 10.0;
inline constexpr double kDiscomfortDistance = 0.25;
inline constexpr double kDiscomfortScale = 2.5;
inline constexpr double kShapingScale = 2.0;

/// Smallest surface-to-surface gap between the robot and any human; +inf
/// when there are no humans. Negative means overlap.
inline double min_separation(const WorldState& world) {
  double d_min = std::numeric_limits<double>::infinity();
  const Vec2 p = world.robot.position();
  for (const HumanState& h : world.humans) {
    d_min = std::min(d_min, (h.position() - p).norm() - world.robot.rho - h.radius);
  }
  return d_min;
}

/// Piecewise reward, cases tried in order: collision, discomfort, goal,
/// potential shaping. The terminal flag is independent of which reward case
/// fired: collision beats goal, and timeout applies only when neither holds.
inline StepOutcome reward_from_distances(double d_min, double d_goal, double d_goal_prev, double rho,
                                         bool horizon_reached) {
  StepOutcome out;
  out.d_min = d_min;
  out.d_goal = d_goal;

  if (d_min < 0.0) {
    out.reward = kCollisionReward;
  } else if (d_min > 0.0 && d_min < kDiscomfortDistance) {
    out.reward = kDiscomfortScale * (d_min - kDiscomfortDistance);
  } else if (d_goal <= rho) {
    out.reward = kGoalReward;
  } else {
    out.reward = kShapingScale * (-d_goal + d_goal_prev);
  }

  if (d_min < 0.0) {
    out.terminal = Terminal::Collision;
  } else if (d_goal <= rho) {
    out.terminal = Terminal::ReachGoal;
  } else if (horizon_reached) {
    out.terminal = Terminal::Timeout;
  }
  return out;
}

/// Reward for the transition prev -> cur of the same episode.
inline StepOutcome compute_reward(const WorldState& prev, const WorldState& cur) {
  return reward_from_distances(min_separation(cur), cur.robot.goal_distance(), prev.robot.goal_distance(),
                               cur.robot.rho, cur.t >= cur.config.horizon);
}

}  // namespace crowdnav::sim
