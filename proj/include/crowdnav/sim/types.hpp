#pragma once

#include "crowdnav/agents/orca.hpp"
#include "crowdnav/agents/social_force.hpp"
#include "crowdnav/errors.hpp"
#include "crowdnav/math.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace crowdnav::sim {

struct RobotState {
  double px = 0.0, py = 0.0;
  double vx = 0.0, vy = 0.0;
  double gx = 0.0, gy = 0.0;
  double v_max = 1.0;
  double theta = 0.0;
  double rho = 0.3;

  Vec2 position() const { return {px, py}; }
  Vec2 velocity() const { return {vx, vy}; }
  Vec2 goal() const { return {gx, gy}; }
  double goal_distance() const { return (goal() - position()).norm(); }

  bool operator==(const RobotState&) const = default;
};

struct HumanState {
  double px = 0.0, py = 0.0;
  double vx = 0.0, vy = 0.0;
  double gx = 0.0, gy = 0.0;
  double radius = 0.3;
  double v_max = 1.0;
  /// Member of a static group: never gets a new goal and prefers zero velocity.
  bool is_static = false;

  Vec2 position() const { return {px, py}; }
  Vec2 velocity() const { return {vx, vy}; }
  Vec2 goal() const { return {gx, gy}; }

  bool operator==(const HumanState&) const = default;
};

enum class EnvKind { FoV, Group };
enum class HumanPolicy { Orca, SocialForce };
enum class Terminal { None, ReachGoal, Collision, Timeout };

inline const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::None: return "none";
    case Terminal::ReachGoal: return "success";
    case Terminal::Collision: return "collision";
    case Terminal::Timeout: return "timeout";
  }
  return "?";
}

struct ScenarioConfig {
  EnvKind env_kind = EnvKind::FoV;
  double fov_deg = 360.0;
  int n_humans = 5;
  int n_static_groups = 0;
  int static_group_size = 3;
  double circle_radius = 6.0;
  double dt = 0.25;
  int horizon = 100;
  double gamma = 0.99;
  std::uint64_t rng_seed = 0;

  double human_radius_min = 0.3, human_radius_max = 0.5;
  double human_v_max_min = 0.5, human_v_max_max = 1.5;
  double robot_radius = 0.3;
  double robot_v_max = 1.0;
  /// Start/goal of the robot are at least this far apart.
  double robot_min_goal_distance = 6.0;
  double goal_change_prob = 0.01;
  double spawn_margin = 0.2;
  /// Uniform per-coordinate jitter applied to circle placements.
  double placement_noise = 0.5;

  HumanPolicy human_policy = HumanPolicy::Orca;
  agents::OrcaParams orca;
  agents::SocialForceParams social_force;

  bool operator==(const ScenarioConfig&) const = default;

  int n_static_humans() const { return env_kind == EnvKind::Group ? n_static_groups * static_group_size : 0; }

  /// Throws ConfigError naming the first bad field (relative to the scenario section).
  void validate() const {
    if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw ConfigError("fov_deg", "must be in (0, 360]");
    if (n_humans < 0) throw ConfigError("n_humans", "must be >= 0");
    if (n_static_groups < 0) throw ConfigError("n_static_groups", "must be >= 0");
    if (static_group_size < 1) throw ConfigError("static_group_size", "must be >= 1");
    if (n_static_humans() > n_humans) throw ConfigError("n_static_groups", "static group members exceed n_humans");
    if (!(circle_radius > 0.0)) throw ConfigError("circle_radius", "must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
    if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must be in (0, 1]");
    if (!(human_radius_min > 0.0 && human_radius_min <= human_radius_max))
      throw ConfigError("human_radius_min", "need 0 < human_radius_min <= human_radius_max");
    if (!(human_v_max_min > 0.0 && human_v_max_min <= human_v_max_max))
      throw ConfigError("human_v_max_min", "need 0 < human_v_max_min <= human_v_max_max");
    if (!(robot_radius > 0.0)) throw ConfigError("robot_radius", "must be > 0");
    if (!(robot_v_max > 0.0)) throw ConfigError("robot_v_max", "must be > 0");
    if (!(robot_min_goal_distance >= 0.0)) throw ConfigError("robot_min_goal_distance", "must be >= 0");
    if (!(goal_change_prob >= 0.0 && goal_change_prob <= 1.0)) throw ConfigError("goal_change_prob", "must be in [0, 1]");
    if (!(spawn_margin >= 0.0)) throw ConfigError("spawn_margin", "must be >= 0");
    if (!(placement_noise >= 0.0)) throw ConfigError("placement_noise", "must be >= 0");
    try {
      orca.validate();
      social_force.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("controllers", e.what());
    }
  }
};

/// The robot's memory of one human: where and when it was last seen and the
/// velocity estimated at that moment.
struct SeenRecord {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  int t = 0;

  bool operator==(const SeenRecord&) const = default;
};

struct WorldState {
  RobotState robot;
  std::vector<HumanState> humans;
  int t = 0;
  ScenarioConfig config;
  /// Drives goal changes and Social Force tie-breaking within the episode.
  std::mt19937_64 rng;
  /// Robot belief bookkeeping, one entry per human.
  std::vector<SeenRecord> last_seen;
  Terminal terminal = Terminal::None;

  bool operator==(const WorldState&) const = default;
};

struct StepOutcome {
  double reward = 0.0;
  Terminal terminal = Terminal::None;
  double d_min = 0.0;
  double d_goal = 0.0;
};

}  // namespace crowdnav::sim
