#pragma once

#include "crowdnav/json_fields.hpp"
#include "crowdnav/sim/types.hpp"

#include <string>

namespace crowdnav::sim {

inline bool parse_env_kind(const std::string& s, EnvKind& out) {
  if (s == "fov") out = EnvKind::FoV;
  else if (s == "group") out = EnvKind::Group;
  else return false;
  return true;
}

inline bool parse_human_policy(const std::string& s, HumanPolicy& out) {
  if (s == "orca") out = HumanPolicy::Orca;
  else if (s == "social_force") out = HumanPolicy::SocialForce;
  else return false;
  return true;
}

inline Json to_json(const ScenarioConfig& c) {
  return Json{
      {"env_kind", c.env_kind == EnvKind::FoV ? "fov" : "group"},
      {"fov_deg", c.fov_deg},
      {"n_humans", c.n_humans},
      {"n_static_groups", c.n_static_groups},
      {"static_group_size", c.static_group_size},
      {"circle_radius", c.circle_radius},
      {"dt", c.dt},
      {"horizon", c.horizon},
      {"gamma", c.gamma},
      {"rng_seed", c.rng_seed},
      {"human_radius_min", c.human_radius_min},
      {"human_radius_max", c.human_radius_max},
      {"human_v_max_min", c.human_v_max_min},
      {"human_v_max_max", c.human_v_max_max},
      {"robot_radius", c.robot_radius},
      {"robot_v_max", c.robot_v_max},
      {"robot_min_goal_distance", c.robot_min_goal_distance},
      {"goal_change_prob", c.goal_change_prob},
      {"spawn_margin", c.spawn_margin},
      {"placement_noise", c.placement_noise},
      {"human_policy", c.human_policy == HumanPolicy::Orca ? "orca" : "social_force"},
      {"orca",
       {{"time_horizon", c.orca.time_horizon},
        {"neighbor_dist", c.orca.neighbor_dist},
        {"max_neighbors", c.orca.max_neighbors},
        {"safety_buffer", c.orca.safety_buffer}}},
      {"social_force",
       {{"relaxation_time", c.social_force.relaxation_time},
        {"repulsion_strength", c.social_force.repulsion_strength},
        {"repulsion_range", c.social_force.repulsion_range}}},
  };
}

/// Overlays the keys present in `r` onto `c` and validates the result;
/// errors name the full dotted path.
inline void read_scenario(FieldReader r, ScenarioConfig& c) {
  r.read_enum("env_kind", c.env_kind, parse_env_kind, "fov, group");
  r.read("fov_deg", c.fov_deg).read("n_humans", c.n_humans).read("n_static_groups", c.n_static_groups);
  r.read("static_group_size", c.static_group_size).read("circle_radius", c.circle_radius).read("dt", c.dt);
  r.read("horizon", c.horizon).read("gamma", c.gamma).read("rng_seed", c.rng_seed);
  r.read("human_radius_min", c.human_radius_min).read("human_radius_max", c.human_radius_max);
  r.read("human_v_max_min", c.human_v_max_min).read("human_v_max_max", c.human_v_max_max);
  r.read("robot_radius", c.robot_radius).read("robot_v_max", c.robot_v_max);
  r.read("robot_min_goal_distance", c.robot_min_goal_distance).read("goal_change_prob", c.goal_change_prob);
  r.read("spawn_margin", c.spawn_margin).read("placement_noise", c.placement_noise);
  r.read_enum("human_policy", c.human_policy, parse_human_policy, "orca, social_force");

  FieldReader orca = r.section("orca");
  orca.read("time_horizon", c.orca.time_horizon).read("neighbor_dist", c.orca.neighbor_dist);
  orca.read("max_neighbors", c.orca.max_neighbors).read("safety_buffer", c.orca.safety_buffer);
  orca.reject_unknown();

  FieldReader sf = r.section("social_force");
  sf.read("relaxation_time", c.social_force.relaxation_time);
  sf.read("repulsion_strength", c.social_force.repulsion_strength);
  sf.read("repulsion_range", c.social_force.repulsion_range);
  sf.reject_unknown();
  r.reject_unknown();

  try {
    c.validate();
  } catch (const ConfigError& e) {
    std::string what = e.what();
    const std::string prefix = e.field() + ": ";
    if (what.rfind(prefix, 0) == 0) what = what.substr(prefix.size());
    throw ConfigError(r.field_path(e.field()), what);
  }
}

inline ScenarioConfig scenario_from_json(const Json& j, const std::string& path = "scenario") {
  ScenarioConfig c;
  read_scenario(FieldReader(j, path), c);
  return c;
}

}  // namespace crowdnav::sim
