#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/eval/controllers.hpp"
#include "crowdnav/json_fields.hpp"
#include "crowdnav/sim/environment.hpp"
#include "crowdnav/sim/scenario.hpp"
#include "crowdnav/sim/trajectory.hpp"

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace crowdnav::eval {

struct EpisodeRecord {
  std::uint64_t seed = 0;
  sim::Terminal outcome = sim::Terminal::None;
  int steps = 0;
  double nav_time = 0.0;  // steps * dt for successes, 0 otherwise
  double total_reward = 0.0;

  // Filled when trajectories are recorded.
  sim::WorldState initial;
  std::vector<sim::TrajectoryRow> rows;  // post-step states, t = 1..steps
  double final_heading = 0.0;
};

struct EvalReport {
  std::string policy;
  int n_episodes = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  double mean_nav_time = 0.0;  // over successes; NaN when there are none
  double mean_reward = 0.0;
  std::vector<EpisodeRecord> episodes;  // sorted by seed
};

/// Aggregates per-episode records. The timeout rate is 1 - (success + collision)
/// so the three rates add to exactly 1 in floating point.
inline EvalReport summarize(std::string policy, std::vector<EpisodeRecord> episodes) {
  std::sort(episodes.begin(), episodes.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  EvalReport r;
  r.policy = std::move(policy);
  r.n_episodes = static_cast<int>(episodes.size());
  int success = 0, collision = 0;
  double nav = 0.0, reward = 0.0;
  for (const auto& e : episodes) {
    if (e.outcome == sim::Terminal::ReachGoal) {
      ++success;
      nav += e.nav_time;
    } else if (e.outcome == sim::Terminal::Collision) {
      ++collision;
    } else if (e.outcome != sim::Terminal::Timeout) {
      throw ContractViolation("episode " + std::to_string(e.seed) + " did not terminate");
    }
    reward += e.total_reward;
  }
  if (r.n_episodes > 0) {
    const double n = r.n_episodes;
    r.success_rate = success / n;
    r.collision_rate = collision / n;
    r.timeout_rate = 1.0 - (r.success_rate + r.collision_rate);
    r.mean_reward = reward / n;
  }
  r.mean_nav_time = success > 0 ? nav / success : std::numeric_limits<double>::quiet_NaN();
  r.episodes = std::move(episodes);
  return r;
}

/// Runs one episode of `scenario` generated from `seed` to termination.
inline EpisodeRecord run_episode(Controller& controller, const sim::ScenarioConfig& scenario, std::uint64_t seed,
                                 bool record_trajectory) {
  sim::WorldState world = sim::generate_scenario(scenario, seed);
  sim::Observation obs = sim::initial_observation(world);
  controller.reset(world, seed);

  EpisodeRecord rec;
  rec.seed = seed;
  if (record_trajectory) rec.initial = world;
  while (world.terminal == sim::Terminal::None) {
    const Vec2 action = controller.act(world, obs);
    auto [next, outcome] = sim::step_world(world, action);
    obs = std::move(next);
    rec.total_reward += outcome.reward;
    if (record_trajectory) {
      auto rows = sim::snapshot_rows(world, obs.visible);
      rec.rows.insert(rec.rows.end(), rows.begin(), rows.end());
    }
  }
  rec.outcome = world.terminal;
  rec.steps = world.t;
  rec.nav_time = rec.outcome == sim::Terminal::ReachGoal ? world.t * scenario.dt : 0.0;
  rec.final_heading = world.robot.theta;
  return rec;
}

/// Episodes use seeds seed_base, seed_base + 1, ...
inline EvalReport evaluate(Controller& controller, const sim::ScenarioConfig& scenario, int n_episodes,
                           std::uint64_t seed_base, bool record_trajectories = false) {
  scenario.validate();
  if (n_episodes < 1) throw InvalidArgument("n_episodes must be >= 1");
  std::vector<EpisodeRecord> eps;
  eps.reserve(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i)
    eps.push_back(run_episode(controller, scenario, seed_base + static_cast<std::uint64_t>(i), record_trajectories));
  return summarize(controller.name(), std::move(eps));
}

inline Json report_summary_json(const EvalReport& r, const std::string& suite = "") {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j = {{"policy", r.policy},
            {"n_episodes", r.n_episodes},
            {"success_rate", r.success_rate},
            {"collision_rate", r.collision_rate},
            {"timeout_rate", r.timeout_rate},
            {"mean_nav_time", num(r.mean_nav_time)},
            {"mean_reward", r.mean_reward}};
  if (!suite.empty()) j["suite"] = suite;
  return j;
}

inline void write_episode_csv(std::ostream& os, const EvalReport& r) {
  os << "seed,outcome,steps,nav_time,total_reward\n";
  for (const auto& e : r.episodes) {
    os << e.seed << ',' << sim::to_string(e.outcome) << ',' << e.steps << ',';
    sim::csv_detail::put_double(os, e.nav_time);
    os << ',';
    sim::csv_detail::put_double(os, e.total_reward);
    os << '\n';
  }
}

/// One summary line: policy, suite, the three rates and mean navigation time.
inline std::string table_row(const EvalReport& r, const std::string& suite) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %-10s success %5.2f  collision %5.2f  timeout %5.2f  nav_time %s",
                r.policy.c_str(), suite.c_str(), r.success_rate, r.collision_rate, r.timeout_rate,
                std::isfinite(r.mean_nav_time) ? (std::to_string(r.mean_nav_time).substr(0, 5) + " s").c_str() : "n/a");
  return buf;
}

}  // namespace crowdnav::eval
