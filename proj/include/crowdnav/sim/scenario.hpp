#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/sim/observation.hpp"
#include "crowdnav/sim/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace crowdnav::sim {

inline constexpr int kMaxPlacementAttempts = 1000;

namespace scenario_detail {

struct Disk {
  Vec2 center;
  double radius;
};

inline bool clear_of(const std::vector<Disk>& disks, const Vec2& p, double radius, double margin) {
  for (const Disk& d : disks) {
    if ((d.center - p).norm() < d.radius + radius + margin) return false;
  }
  return true;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec2 jitter(std::mt19937_64& rng, double noise) {
  if (noise <= 0.0) return Vec2::Zero();
  return {uniform(rng, -noise, noise), uniform(rng, -noise, noise)};
}

/// Radius of the ring holding a static group so neighbours never overlap.
inline double group_ring_radius(const ScenarioConfig& c) {
  const int k = c.static_group_size;
  if (k < 2) return 0.0;
  return (2.0 * c.human_radius_max + c.spawn_margin) / (2.0 * std::sin(std::numbers::pi / k)) + 1e-6;
}

}  // namespace scenario_detail

/// A random point on the crossing circle, jittered; used for fresh human goals.
inline Vec2 sample_circle_point(const ScenarioConfig& config, std::mt19937_64& rng) {
  const double a = scenario_detail::uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return config.circle_radius * Vec2(std::cos(a), std::sin(a)) + scenario_detail::jitter(rng, config.placement_noise);
}

/// Samples a full initial world for `config`. Deterministic in (config, seed).
inline WorldState generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  using namespace scenario_detail;
  config.validate();

  WorldState world;
  world.config = config;
  world.rng.seed(seed);
  std::mt19937_64& rng = world.rng;
  const double R = config.circle_radius;
  const double margin = config.spawn_margin;

  RobotState& robot = world.robot;
  robot.rho = config.robot_radius;
  robot.v_max = config.robot_v_max;
  bool placed = false;
  for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
    robot.px = uniform(rng, -R, R);
    robot.py = uniform(rng, -R, R);
    robot.gx = uniform(rng, -R, R);
    robot.gy = uniform(rng, -R, R);
    placed = robot.goal_distance() >= config.robot_min_goal_distance;
  }
  if (!placed) throw ScenarioGenerationError("could not place robot start/goal");
  robot.theta = std::atan2(robot.gy - robot.py, robot.gx - robot.px);

  std::vector<Disk> starts{{robot.position(), robot.rho}};
  std::vector<Disk> goals;

  auto sample_human = [&](HumanState& h) {
    h.radius = uniform(rng, config.human_radius_min, config.human_radius_max);
    h.v_max = uniform(rng, config.human_v_max_min, config.human_v_max_max);
  };

  if (config.env_kind == EnvKind::Group) {
    const double ring = group_ring_radius(config);
    const double extent = std::max(R - ring, 0.0);
    // Static members must also keep clear of the robot goal.
    std::vector<Disk> robot_goal{{robot.goal(), robot.rho}};
    for (int g = 0; g < config.n_static_groups; ++g) {
      placed = false;
      for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
        const Vec2 center(uniform(rng, -extent, extent), uniform(rng, -extent, extent));
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        std::vector<HumanState> members(static_cast<std::size_t>(config.static_group_size));
        placed = true;
        std::vector<Disk> trial = starts;
        for (int k = 0; k < config.static_group_size && placed; ++k) {
          HumanState& h = members[static_cast<std::size_t>(k)];
          sample_human(h);
          const double a = phase + 2.0 * std::numbers::pi * k / config.static_group_size;
          const Vec2 p = center + ring * Vec2(std::cos(a), std::sin(a));
          placed = clear_of(trial, p, h.radius, margin) && clear_of(robot_goal, p, h.radius, margin);
          h.px = h.gx = p.x();
          h.py = h.gy = p.y();
          h.is_static = true;
          trial.push_back({p, h.radius});
        }
        if (placed) {
          starts = std::move(trial);
          for (const HumanState& h : members) world.humans.push_back(h);
        }
      }
      if (!placed) throw ScenarioGenerationError("could not place static group " + std::to_string(g));
    }
  }

  const int n_dynamic = config.n_humans - config.n_static_humans();
  for (int i = 0; i < n_dynamic; ++i) {
    HumanState h;
    placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      sample_human(h);
      const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      const Vec2 on_circle = R * Vec2(std::cos(a), std::sin(a));
      const Vec2 start = on_circle + jitter(rng, config.placement_noise);
      const Vec2 goal = -on_circle + jitter(rng, config.placement_noise);
      placed = clear_of(starts, start, h.radius, margin) && clear_of(goals, goal, h.radius, margin);
      if (placed) {
        h.px = start.x();
        h.py = start.y();
        h.gx = goal.x();
        h.gy = goal.y();
        starts.push_back({start, h.radius});
        goals.push_back({goal, h.radius});
      }
    }
    if (!placed) throw ScenarioGenerationError("could not place dynamic human " + std::to_string(i));
    world.humans.push_back(h);
  }

  world.last_seen = spawn_snapshot(world);
  return world;
}

}  // namespace crowdnav::sim
