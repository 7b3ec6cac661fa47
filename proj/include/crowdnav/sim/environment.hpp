#pragma once

#include "crowdnav/agents/orca.hpp"
#include "crowdnav/agents/social_force.hpp"
#include "crowdnav/errors.hpp"
#include "crowdnav/sim/kinematics.hpp"
#include "crowdnav/sim/observation.hpp"
#include "crowdnav/sim/reward.hpp"
#include "crowdnav/sim/scenario.hpp"
#include "crowdnav/sim/types.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace crowdnav::sim {

inline agents::AgentView human_view(const HumanState& h) {
  agents::AgentView v;
  v.position = h.position();
  v.velocity = h.velocity();
  v.radius = h.radius;
  v.v_max = h.v_max;
  v.goal = h.goal();
  v.holds_position = h.is_static;
  return v;
}

/// Velocities every human wants this step. Humans only see other humans.
inline std::vector<Vec2> human_actions(WorldState& world) {
  const std::size_t n = world.humans.size();
  std::vector<agents::AgentView> views;
  views.reserve(n);
  for (const HumanState& h : world.humans) views.push_back(human_view(h));

  std::vector<Vec2> actions(n);
  std::vector<agents::AgentView> others;
  others.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(views[j]);
    }
    if (world.config.human_policy == HumanPolicy::Orca) {
      actions[i] = agents::orca_velocity(views[i], others, world.config.orca, world.config.dt);
    } else {
      actions[i] = agents::social_force_velocity(views[i], others, world.config.social_force, world.config.dt,
                                                 world.rng);
    }
  }
  return actions;
}

/// Advances `world` one timestep in place and returns the new observation
/// together with the reward/terminal outcome.
inline std::pair<Observation, StepOutcome> step_world(WorldState& world, const Vec2& robot_action) {
  if (world.terminal != Terminal::None) throw ContractViolation("step called on a terminal episode");
  if (!std::isfinite(robot_action.x()) || !std::isfinite(robot_action.y()))
    throw InvalidArgument("non-finite robot action");

  const ScenarioConfig& cfg = world.config;
  const double d_goal_prev = world.robot.goal_distance();
  const std::vector<Vec2> actions = human_actions(world);

  RobotState& robot = world.robot;
  const KinematicState r = step_kinematics({robot.position(), robot.velocity()}, robot_action, robot.v_max, cfg.dt);
  robot.px = r.position.x();
  robot.py = r.position.y();
  robot.vx = r.velocity.x();
  robot.vy = r.velocity.y();
  if (r.velocity.norm() > 1e-9) robot.theta = std::atan2(robot.vy, robot.vx);

  for (std::size_t i = 0; i < world.humans.size(); ++i) {
    HumanState& h = world.humans[i];
    const KinematicState k = step_kinematics({h.position(), h.velocity()}, actions[i], h.v_max, cfg.dt);
    h.px = k.position.x();
    h.py = k.position.y();
    h.vx = k.velocity.x();
    h.vy = k.velocity.y();
  }
  ++world.t;

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (HumanState& h : world.humans) {
    if (h.is_static) continue;
    if ((h.goal() - h.position()).norm() <= h.radius) {
      const Vec2 g = sample_circle_point(cfg, world.rng);
      h.gx = g.x();
      h.gy = g.y();
    }
    if (coin(world.rng) < cfg.goal_change_prob) {
      const Vec2 g = sample_circle_point(cfg, world.rng);
      h.gx = g.x();
      h.gy = g.y();
    }
  }

  const StepOutcome outcome = reward_from_distances(min_separation(world), robot.goal_distance(), d_goal_prev,
                                                    robot.rho, world.t >= cfg.horizon);
  world.terminal = outcome.terminal;

  Observation obs = observe(world, robot.theta, cfg.fov_deg);
  world.last_seen = obs.last_seen;
  return {std::move(obs), outcome};
}

struct EnvStepResult {
  Observation observation;
  StepOutcome outcome;
  WorldState world;
};

/// Value-semantics step: the input world is left untouched.
inline EnvStepResult env_step(const WorldState& world, const Vec2& robot_action) {
  EnvStepResult result{{}, {}, world};
  auto [obs, outcome] = step_world(result.world, robot_action);
  result.observation = std::move(obs);
  result.outcome = outcome;
  return result;
}

/// Observation at the current timestep, committing the belief update.
inline Observation initial_observation(WorldState& world) {
  Observation obs = observe(world, world.robot.theta, world.config.fov_deg);
  world.last_seen = obs.last_seen;
  return obs;
}

/// A resettable episode driver. Each reset draws a fresh scenario seed from
/// the environment's own stream, so independently seeded instances share no state.
class Environment {
 public:
  Environment(ScenarioConfig config, std::uint64_t stream_seed) : config_(std::move(config)), stream_(stream_seed) {
    config_.validate();
  }

  const Observation& reset() { return reset_with_seed(stream_()); }

  const Observation& reset_with_seed(std::uint64_t scenario_seed) {
    scenario_seed_ = scenario_seed;
    world_ = generate_scenario(config_, scenario_seed);
    observation_ = initial_observation(world_);
    return observation_;
  }

  StepOutcome step(const Vec2& action) {
    auto [obs, outcome] = step_world(world_, action);
    observation_ = std::move(obs);
    return outcome;
  }

  const ScenarioConfig& config() const { return config_; }
  const WorldState& world() const { return world_; }
  const Observation& observation() const { return observation_; }
  std::uint64_t scenario_seed() const { return scenario_seed_; }
  bool done() const { return world_.terminal != Terminal::None; }

  std::mt19937_64& stream() { return stream_; }
  const std::mt19937_64& stream() const { return stream_; }

  /// Restores a mid-episode snapshot (used by trainer resume).
  void restore(WorldState world, std::mt19937_64 stream, std::uint64_t scenario_seed) {
    world_ = std::move(world);
    observation_ = committed_observation(world_);
    stream_ = stream;
    scenario_seed_ = scenario_seed;
  }

 private:
  ScenarioConfig config_;
  std::mt19937_64 stream_;
  WorldState world_;
  Observation observation_;
  std::uint64_t scenario_seed_ = 0;
};

}  // namespace crowdnav::sim
