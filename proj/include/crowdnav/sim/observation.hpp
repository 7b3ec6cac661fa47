#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/sim/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace crowdnav::sim {

inline constexpr int kRobotNodeDim = 9;
inline constexpr int kEdgeDim = 2;

using RobotNode = Eigen::Matrix<double, kRobotNodeDim, 1>;

/// What the policy sees at one timestep.
struct Observation {
  /// (px, py, vx, vy, gx, gy, v_max, theta, rho)
  RobotNode robot_node = RobotNode::Zero();
  /// Row i: believed position of human i minus robot position.
  Eigen::MatrixXd spatial_edges;
  /// Robot velocity.
  Vec2 temporal_edge = Vec2::Zero();
  /// Updated belief bookkeeping after this observation.
  std::vector<SeenRecord> last_seen;
  std::vector<bool> visible;

  int n_humans() const { return static_cast<int>(spatial_edges.rows()); }
};

inline RobotNode robot_node_features(const RobotState& r) {
  RobotNode x;
  x << r.px, r.py, r.vx, r.vy, r.gx, r.gy, r.v_max, r.theta, r.rho;
  return x;
}

/// True when the bearing from the robot heading to `target` is within half the FoV.
inline bool in_field_of_view(const Vec2& robot_pos, double heading, double fov_deg, const Vec2& target) {
  if (fov_deg >= 360.0) return true;
  const Vec2 d = target - robot_pos;
  const double bearing = wrap_angle(std::atan2(d.y(), d.x()) - heading);
  return std::abs(bearing) <= 0.5 * deg_to_rad(fov_deg);
}

/// Belief used for humans at episode start: every human seen at spawn, at rest.
inline std::vector<SeenRecord> spawn_snapshot(const WorldState& world) {
  std::vector<SeenRecord> seen;
  seen.reserve(world.humans.size());
  for (const HumanState& h : world.humans) seen.push_back({h.position(), Vec2::Zero(), world.t});
  return seen;
}

/// Builds the observation at world.t from world.last_seen. Visible humans are
/// re-seen (position plus backward-difference velocity); the rest are
/// extrapolated in a straight line from where they were last seen.
inline Observation observe(const WorldState& world, double heading, double fov_deg) {
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw InvalidArgument("fov_deg must be in (0, 360]");
  const std::size_t n = world.humans.size();
  if (world.last_seen.size() != n) throw ContractViolation("last_seen size differs from human count");

  const double dt = world.config.dt;
  const Vec2 robot_pos = world.robot.position();

  Observation obs;
  obs.robot_node = robot_node_features(world.robot);
  obs.temporal_edge = world.robot.velocity();
  obs.spatial_edges.resize(static_cast<Eigen::Index>(n), kEdgeDim);
  obs.last_seen = world.last_seen;
  obs.visible.assign(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    const HumanState& h = world.humans[i];
    SeenRecord& seen = obs.last_seen[i];
    Vec2 believed;
    if (in_field_of_view(robot_pos, heading, fov_deg, h.position())) {
      obs.visible[i] = true;
      const int gap = world.t - seen.t;
      if (gap > 0) seen.velocity = (h.position() - seen.position) / (gap * dt);
      seen.position = h.position();
      seen.t = world.t;
      believed = h.position();
    } else {
      believed = seen.position + seen.velocity * ((world.t - seen.t) * dt);
    }
    obs.spatial_edges.row(static_cast<Eigen::Index>(i)) = (believed - robot_pos).transpose();
  }
  return obs;
}

/// Rebuilds the observation already committed at world.t from the belief
/// cache alone, without re-seeing anyone. Matches what observe() returned.
inline Observation committed_observation(const WorldState& world) {
  const std::size_t n = world.humans.size();
  if (world.last_seen.size() != n) throw ContractViolation("last_seen size differs from human count");
  const Vec2 robot_pos = world.robot.position();
  Observation obs;
  obs.robot_node = robot_node_features(world.robot);
  obs.temporal_edge = world.robot.velocity();
  obs.spatial_edges.resize(static_cast<Eigen::Index>(n), kEdgeDim);
  obs.last_seen = world.last_seen;
  obs.visible.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const SeenRecord& seen = world.last_seen[i];
    obs.visible[i] = in_field_of_view(robot_pos, world.robot.theta, world.config.fov_deg, world.humans[i].position());
    const Vec2 believed =
        seen.t == world.t ? seen.position : Vec2(seen.position + seen.velocity * ((world.t - seen.t) * world.config.dt));
    obs.spatial_edges.row(static_cast<Eigen::Index>(i)) = (believed - robot_pos).transpose();
  }
  return obs;
}

}  // namespace crowdnav::sim
