#pragma once

#include "crowdnav/agents/agent_view.hpp"
#include "crowdnav/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <span>

namespace crowdnav::agents {

struct SocialForceParams {
  double relaxation_time = 0.5;    // s
  double repulsion_strength = 2.0; // m/s^2 at contact
  double repulsion_range = 1.0;    // m, exponential decay length

  bool operator==(const SocialForceParams&) const = default;

  void validate() const {
    if (!(relaxation_time > 0.0)) throw InvalidArgument("social_force.relaxation_time must be > 0");
    if (!(repulsion_strength > 0.0)) throw InvalidArgument("social_force.repulsion_strength must be > 0");
    if (!(repulsion_range > 0.0)) throw InvalidArgument("social_force.repulsion_range must be > 0");
  }
};

/// Repulsive acceleration on `self` from `other`, pointing away from `other`.
/// Coincident centres get a direction drawn from `rng`.
inline Vec2 social_repulsion(const AgentView& self, const AgentView& other, const SocialForceParams& params,
                             std::mt19937_64& rng) {
  const Vec2 diff = self.position - other.position;
  const double dist = diff.norm();
  Vec2 away;
  if (dist > 1e-12) {
    away = diff / dist;
  } else {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double a = angle(rng);
    away = Vec2(std::cos(a), std::sin(a));
  }
  const double magnitude =
      params.repulsion_strength * std::exp((self.radius + other.radius - dist) / params.repulsion_range);
  return magnitude * away;
}

/// One explicit Euler step of the social force model, clipped to v_max.
inline Vec2 social_force_velocity(const AgentView& self, std::span<const AgentView> neighbors,
                                  const SocialForceParams& params, double dt, std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  Vec2 force = (preferred_velocity(self, dt) - self.velocity) / params.relaxation_time;
  for (const AgentView& other : neighbors) force += social_repulsion(self, other, params, rng);
  return clip_norm(self.velocity + force * dt, self.v_max);
}

}  // namespace crowdnav::agents
