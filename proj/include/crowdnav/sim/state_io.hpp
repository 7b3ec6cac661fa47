#pragma once

// JSON snapshots of in-flight episodes. Doubles are written in shortest
// round-trip form, so a reloaded WorldState compares equal to the original.

#include "crowdnav/errors.hpp"
#include "crowdnav/json_fields.hpp"
#include "crowdnav/sim/types.hpp"

#include <random>
#include <sstream>
#include <string>

namespace crowdnav::sim {

template <class Engine>
std::string rng_to_string(const Engine& e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

template <class Engine>
Engine rng_from_string(const std::string& s) {
  Engine e;
  std::istringstream is(s);
  is >> e;
  if (is.fail()) throw CheckpointError("malformed RNG state");
  return e;
}

inline Json world_to_json(const WorldState& w) {
  const RobotState& r = w.robot;
  Json j;
  j["robot"] = {r.px, r.py, r.vx, r.vy, r.gx, r.gy, r.v_max, r.theta, r.rho};
  Json humans = Json::array();
  for (const HumanState& h : w.humans)
    humans.push_back({h.px, h.py, h.vx, h.vy, h.gx, h.gy, h.radius, h.v_max, h.is_static ? 1.0 : 0.0});
  j["humans"] = std::move(humans);
  Json seen = Json::array();
  for (const SeenRecord& s : w.last_seen)
    seen.push_back({s.position.x(), s.position.y(), s.velocity.x(), s.velocity.y(), static_cast<double>(s.t)});
  j["last_seen"] = std::move(seen);
  j["t"] = w.t;
  j["terminal"] = static_cast<int>(w.terminal);
  j["rng"] = rng_to_string(w.rng);
  return j;
}

/// Inverse of world_to_json; the scenario config comes from the run, not the snapshot.
inline WorldState world_from_json(const Json& j, const ScenarioConfig& config) {
  try {
    WorldState w;
    w.config = config;
    const auto r = j.at("robot").get<std::vector<double>>();
    if (r.size() != 9) throw CheckpointError("robot record must have 9 entries");
    w.robot = {r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]};
    for (const Json& hj : j.at("humans")) {
      const auto h = hj.get<std::vector<double>>();
      if (h.size() != 9) throw CheckpointError("human record must have 9 entries");
      w.humans.push_back({h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8] != 0.0});
    }
    for (const Json& sj : j.at("last_seen")) {
      const auto s = sj.get<std::vector<double>>();
      if (s.size() != 5) throw CheckpointError("last_seen record must have 5 entries");
      w.last_seen.push_back({Vec2(s[0], s[1]), Vec2(s[2], s[3]), static_cast<int>(s[4])});
    }
    w.t = j.at("t").get<int>();
    const int term = j.at("terminal").get<int>();
    if (term < 0 || term > 3) throw CheckpointError("bad terminal code");
    w.terminal = static_cast<Terminal>(term);
    w.rng = rng_from_string<std::mt19937_64>(j.at("rng").get<std::string>());
    if (w.last_seen.size() != w.humans.size()) throw CheckpointError("last_seen/humans length mismatch");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("world snapshot: ") + e.what());
  }
}

}  // namespace crowdnav::sim
