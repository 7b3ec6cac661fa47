#pragma once

#include "crowdnav/sim/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crowdnav::eval {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"fov-90", "fov-180", "fov-360", "group-10", "group-15", "group-20"};
  return names;
}

/// Scenario for a named suite on top of `base` (dt, horizon, ranges, controllers);
/// nullopt for an unknown name.
inline std::optional<sim::ScenarioConfig> suite_config(const std::string& name, sim::ScenarioConfig base = {}) {
  sim::ScenarioConfig c = base;
  if (name == "fov-90" || name == "fov-180" || name == "fov-360") {
    c.env_kind = sim::EnvKind::FoV;
    c.fov_deg = std::stod(name.substr(4));
    c.n_humans = 5;
    c.n_static_groups = 0;
  } else if (name == "group-10" || name == "group-15" || name == "group-20") {
    c.env_kind = sim::EnvKind::Group;
    c.fov_deg = 360.0;
    c.n_humans = std::stoi(name.substr(6));
    c.n_static_groups = 3;
    c.static_group_size = 3;
  } else {
    return std::nullopt;
  }
  c.validate();
  return c;
}

}  // namespace crowdnav::eval
