#pragma once

// Two identical ORCA agents swapping places along the x axis.

#include "crowdnav/agents/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace head_on {

struct Trace {
  std::vector<crowdnav::Vec2> pa, pb, va, vb;
  double d_min = std::numeric_limits<double>::infinity();
  /// Largest deviation from b = -a over all positions and velocities.
  double mirror_error = 0.0;
};

/// A starts at (-d, lateral), B at (d, -lateral); each heads for the other's start.
inline Trace simulate(double half_distance, double lateral, int steps, double dt = 0.25) {
  using crowdnav::Vec2;
  using namespace crowdnav::agents;
  AgentView a, b;
  a.position = {-half_distance, lateral};
  b.position = {half_distance, -lateral};
  a.goal = b.position;
  b.goal = a.position;
  a.radius = b.radius = 0.3;
  a.v_max = b.v_max = 1.0;
  const OrcaParams params;
  Trace tr;
  for (int k = 0; k < steps; ++k) {
    const AgentView na[1] = {b};
    const AgentView nb[1] = {a};
    const Vec2 va = orca_velocity(a, na, params, dt);
    const Vec2 vb = orca_velocity(b, nb, params, dt);
    a.velocity = va;
    b.velocity = vb;
    a.position += va * dt;
    b.position += vb * dt;
    tr.pa.push_back(a.position);
    tr.pb.push_back(b.position);
    tr.va.push_back(va);
    tr.vb.push_back(vb);
    tr.d_min = std::min(tr.d_min, (a.position - b.position).norm() - a.radius - b.radius);
    tr.mirror_error = std::max({tr.mirror_error, (a.position + b.position).cwiseAbs().maxCoeff(),
                                (va + vb).cwiseAbs().maxCoeff()});
  }
  return tr;
}

}  // namespace head_on
