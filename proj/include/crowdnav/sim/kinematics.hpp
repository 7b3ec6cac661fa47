#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/math.hpp"

#include <cmath>

namespace crowdnav::sim {

struct KinematicState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

/// Holonomic update: the (speed-clipped) desired velocity is reached at once
/// and held for dt, so p' = p + v' * dt componentwise.
inline KinematicState step_kinematics(const KinematicState& state, const Vec2& action, double v_max, double dt) {
  if (!std::isfinite(action.x()) || !std::isfinite(action.y())) throw InvalidArgument("non-finite action");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(v_max > 0.0)) throw InvalidArgument("v_max must be > 0");

  KinematicState next;
  next.velocity = clip_norm(action, v_max);
  next.position.x() = state.position.x() + next.velocity.x() * dt;
  next.position.y() = state.position.y() + next.velocity.y() * dt;
  return next;
}

}  // namespace crowdnav::sim
