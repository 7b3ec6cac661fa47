#include "crowdnav/sim/config_io.hpp"
#include "crowdnav/sim/environment.hpp"
#include "crowdnav/sim/state_io.hpp"
#include "crowdnav/sim/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace crowdnav;
using namespace crowdnav::sim;

TEST(Kinematics, MovesByVelocityTimesDt) {
  const KinematicState s = step_kinematics({Vec2(0, 0), Vec2(0, 0)}, Vec2(1, 2), 5.0, 0.25);
  EXPECT_DOUBLE_EQ(s.position.x(), 0.25);
  EXPECT_DOUBLE_EQ(s.position.y(), 0.5);
}

TEST(Kinematics, ClipsToVmax) {
  const KinematicState s = step_kinematics({Vec2(1, -1), Vec2(0, 0)}, Vec2(10, 0), 2.0, 0.25);
  EXPECT_DOUBLE_EQ(s.velocity.x(), 2.0);
  EXPECT_DOUBLE_EQ(s.velocity.y(), 0.0);
  EXPECT_DOUBLE_EQ(s.position.x(), 1.5);
  EXPECT_DOUBLE_EQ(s.position.y(), -1.0);
}

TEST(Kinematics, RejectsBadInputs) {
  EXPECT_THROW(step_kinematics({}, Vec2(NAN, 0), 1.0, 0.25), InvalidArgument);
  EXPECT_THROW(step_kinematics({}, Vec2(0, INFINITY), 1.0, 0.25), InvalidArgument);
  EXPECT_THROW(step_kinematics({}, Vec2(0, 0), 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(step_kinematics({}, Vec2(0, 0), 1.0, -1.0), InvalidArgument);
}

TEST(Reward, Cases) {
  EXPECT_EQ(reward_from_distances(-0.05, 3.0, 3.0, 0.3, false).reward, -20.0);
  EXPECT_EQ(reward_from_distances(-0.05, 3.0, 3.0, 0.3, false).terminal, Terminal::Collision);
  EXPECT_NEAR(reward_from_distances(0.10, 3.0, 3.0, 0.3, false).reward, -0.375, 1e-15);
  EXPECT_NEAR(reward_from_distances(1.0, 2.0, 2.2, 0.3, false).reward, 0.4, 1e-15);
  const StepOutcome goal = reward_from_distances(1.0, 0.2, 0.5, 0.3, false);
  EXPECT_EQ(goal.reward, 10.0);
  EXPECT_EQ(goal.terminal, Terminal::ReachGoal);
}

TEST(Reward, CollisionBeatsGoal) {
  const StepOutcome o = reward_from_distances(-0.01, 0.1, 0.5, 0.3, true);
  EXPECT_EQ(o.reward, -20.0);
  EXPECT_EQ(o.terminal, Terminal::Collision);
}

TEST(Reward, TimeoutOnlyWithoutOtherTerminal) {
  EXPECT_EQ(reward_from_distances(1.0, 2.0, 2.0, 0.3, true).terminal, Terminal::Timeout);
  EXPECT_EQ(reward_from_distances(1.0, 0.1, 2.0, 0.3, true).terminal, Terminal::ReachGoal);
  EXPECT_EQ(reward_from_distances(1.0, 2.0, 2.0, 0.3, false).terminal, Terminal::None);
}

TEST(Reward, ZeroGapIsNotDiscomfort) {
  EXPECT_NEAR(reward_from_distances(0.0, 2.0, 2.1, 0.3, false).reward, 0.2, 1e-12);
}

TEST(Observation, OutsideFovIsInvisible) {
  const Vec2 target(std::cos(deg_to_rad(60)), std::sin(deg_to_rad(60)));
  EXPECT_FALSE(in_field_of_view(Vec2::Zero(), 0.0, 90.0, target));
  EXPECT_TRUE(in_field_of_view(Vec2::Zero(), 0.0, 180.0, target));
  EXPECT_TRUE(in_field_of_view(Vec2::Zero(), 0.0, 360.0, -target));
}

TEST(Observation, ExtrapolatesHiddenHumans) {
  WorldState w;
  w.config.dt = 0.25;
  w.robot.theta = std::numbers::pi;  // facing away
  HumanState h;
  h.px = 3.0;
  w.humans.push_back(h);
  w.last_seen.push_back({Vec2(1, 0), Vec2(0.5, 0), 0});
  w.t = 1;
  const Observation obs = observe(w, w.robot.theta, 90.0);
  EXPECT_FALSE(obs.visible[0]);
  EXPECT_DOUBLE_EQ(obs.spatial_edges(0, 0), 1.125);
  EXPECT_DOUBLE_EQ(obs.spatial_edges(0, 1), 0.0);
  EXPECT_EQ(obs.last_seen[0].t, 0);
}

TEST(Observation, VisibleHumanUpdatesBelief) {
  WorldState w;
  w.config.dt = 0.25;
  HumanState h;
  h.px = 2.0;
  h.py = 0.5;
  w.humans.push_back(h);
  w.last_seen.push_back({Vec2(1.5, 0.5), Vec2::Zero(), 2});
  w.t = 4;
  const Observation obs = observe(w, 0.0, 360.0);
  EXPECT_TRUE(obs.visible[0]);
  EXPECT_DOUBLE_EQ(obs.last_seen[0].velocity.x(), 1.0);  // 0.5 m over two steps
  EXPECT_EQ(obs.last_seen[0].t, 4);
  EXPECT_THROW(observe(w, 0.0, 0.0), InvalidArgument);
}

TEST(Scenario, DeterministicInSeed) {
  ScenarioConfig c;
  EXPECT_EQ(generate_scenario(c, 11), generate_scenario(c, 11));
  EXPECT_FALSE(generate_scenario(c, 11) == generate_scenario(c, 12));
}

TEST(Scenario, FovHumansStartNearCircle) {
  ScenarioConfig c;
  c.n_humans = 5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const WorldState w = generate_scenario(c, seed);
    ASSERT_EQ(w.humans.size(), 5u);
    for (const HumanState& h : w.humans) {
      const double r = h.position().norm();
      EXPECT_LE(std::abs(r - c.circle_radius), c.placement_noise * std::sqrt(2.0) + 1e-12);
      EXPECT_GE(h.radius, c.human_radius_min);
      EXPECT_LE(h.radius, c.human_radius_max);
    }
    EXPECT_GE(w.robot.goal_distance(), c.robot_min_goal_distance);
    for (std::size_t i = 0; i < w.humans.size(); ++i) {
      EXPECT_GE((w.humans[i].position() - w.robot.position()).norm(), w.humans[i].radius + w.robot.rho);
      for (std::size_t j = i + 1; j < w.humans.size(); ++j)
        EXPECT_GE((w.humans[i].position() - w.humans[j].position()).norm(),
                  w.humans[i].radius + w.humans[j].radius);
    }
  }
}

TEST(Scenario, GroupCounts) {
  ScenarioConfig c;
  c.env_kind = EnvKind::Group;
  c.n_humans = 10;
  c.n_static_groups = 2;
  c.static_group_size = 3;
  const WorldState w = generate_scenario(c, 3);
  int stat = 0;
  for (const HumanState& h : w.humans) stat += h.is_static ? 1 : 0;
  EXPECT_EQ(stat, 6);
  EXPECT_EQ(static_cast<int>(w.humans.size()) - stat, 4);
}

TEST(Scenario, StaticHumansStayPut) {
  ScenarioConfig c;
  c.env_kind = EnvKind::Group;
  c.n_humans = 10;
  c.n_static_groups = 2;
  WorldState w = generate_scenario(c, 8);
  initial_observation(w);
  const WorldState start = w;
  for (int k = 0; k < 20 && w.terminal == Terminal::None; ++k) step_world(w, Vec2::Zero());
  for (std::size_t i = 0; i < w.humans.size(); ++i) {
    if (!w.humans[i].is_static) continue;
    EXPECT_NEAR((w.humans[i].position() - start.humans[i].position()).norm(), 0.0, 0.2);
    EXPECT_EQ(w.humans[i].goal(), start.humans[i].goal());
  }
}

TEST(Scenario, RejectsImpossibleConfig) {
  ScenarioConfig c;
  c.n_humans = 200;
  c.circle_radius = 1.0;
  c.robot_min_goal_distance = 0.5;
  EXPECT_THROW(generate_scenario(c, 1), ScenarioGenerationError);
}

TEST(Environment, HumanAtGoalGetsFreshGoal) {
  ScenarioConfig c;
  c.n_humans = 1;
  c.goal_change_prob = 0.0;
  WorldState w = generate_scenario(c, 4);
  initial_observation(w);
  HumanState& h = w.humans[0];
  h.gx = h.px + 0.1;  // reached within one step
  h.gy = h.py;
  const Vec2 old_goal = h.goal();
  step_world(w, Vec2::Zero());
  EXPECT_NE(w.humans[0].goal(), old_goal);
  EXPECT_NEAR(w.humans[0].goal().norm(), c.circle_radius, c.placement_noise * std::sqrt(2.0));
}

TEST(Environment, TimesOutAtHorizon) {
  ScenarioConfig c;
  c.n_humans = 0;
  c.horizon = 5;
  WorldState w = generate_scenario(c, 1);
  initial_observation(w);
  StepOutcome last;
  int steps = 0;
  while (w.terminal == Terminal::None) {
    last = step_world(w, Vec2::Zero()).second;
    ++steps;
  }
  EXPECT_EQ(steps, 5);
  EXPECT_EQ(w.t, 5);
  EXPECT_EQ(last.terminal, Terminal::Timeout);
  EXPECT_THROW(step_world(w, Vec2::Zero()), ContractViolation);
}

TEST(Environment, EnvStepLeavesInputUntouched) {
  ScenarioConfig c;
  WorldState w = generate_scenario(c, 2);
  initial_observation(w);
  const WorldState before = w;
  const EnvStepResult r = env_step(w, Vec2(0.3, 0.1));
  EXPECT_EQ(w, before);
  EXPECT_EQ(r.world.t, 1);
  EXPECT_THROW(env_step(w, Vec2(NAN, 0)), InvalidArgument);
}

TEST(Environment, SameSeedSameEpisode) {
  ScenarioConfig c;
  Environment a(c, 99), b(c, 99);
  a.reset();
  b.reset();
  for (int k = 0; k < 30 && !a.done(); ++k) {
    const StepOutcome oa = a.step(Vec2(0.5, -0.2));
    const StepOutcome ob = b.step(Vec2(0.5, -0.2));
    EXPECT_EQ(oa.reward, ob.reward);
  }
  EXPECT_EQ(a.world(), b.world());
}

TEST(Environment, RestoreReproducesObservation) {
  ScenarioConfig c;
  c.fov_deg = 90;
  Environment env(c, 5);
  env.reset();
  for (int k = 0; k < 7; ++k) env.step(Vec2(0.2, 0.6));
  const Json j = world_to_json(env.world());
  Environment copy(c, 0);
  copy.restore(world_from_json(j, c), env.stream(), env.scenario_seed());
  EXPECT_EQ(copy.world(), env.world());
  EXPECT_EQ(copy.observation().spatial_edges, env.observation().spatial_edges);
  EXPECT_EQ(copy.observation().visible, env.observation().visible);
  EXPECT_EQ(copy.step(Vec2(1, 0)).reward, env.step(Vec2(1, 0)).reward);
}

TEST(ConfigIo, RejectsBadFov) {
  Json j = {{"fov_deg", 400}};
  try {
    scenario_from_json(j);
    FAIL() << "accepted fov_deg 400";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "scenario.fov_deg");
  }
}

TEST(ConfigIo, RejectsUnknownKeyAndWrongType) {
  EXPECT_THROW(scenario_from_json(Json{{"fov", 90}}), ConfigError);
  try {
    scenario_from_json(Json{{"n_humans", "five"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "scenario.n_humans");
  }
}

TEST(ConfigIo, RoundTrips) {
  ScenarioConfig c;
  c.env_kind = EnvKind::Group;
  c.n_humans = 15;
  c.n_static_groups = 3;
  c.fov_deg = 180;
  c.human_policy = HumanPolicy::SocialForce;
  EXPECT_EQ(scenario_from_json(to_json(c)), c);
}

TEST(TrajectoryCsv, RoundTrips) {
  ScenarioConfig c;
  WorldState w = generate_scenario(c, 6);
  const Observation o = initial_observation(w);
  const auto rows = snapshot_rows(w, o.visible);
  std::stringstream ss;
  write_trajectory_csv(ss, rows);
  EXPECT_EQ(read_trajectory_csv(ss), rows);
}

TEST(TrajectoryCsv, MissingColumnNamed) {
  std::stringstream ss("t,agent_id,px,py,vx,vy,radius\n0,0,0,0,0,0,0.3\n");
  try {
    read_trajectory_csv(ss);
    FAIL();
  } catch (const CsvParseError& e) {
    EXPECT_NE(std::string(e.what()).find("visible_flag"), std::string::npos);
  }
}

TEST(TrajectoryCsv, BadRowReportsLine) {
  std::stringstream ss("t,agent_id,px,py,vx,vy,radius,visible_flag\n0,0,0,0,0,0,0.3,1\n1,0,zz,0,0,0,0.3,1\n");
  try {
    read_trajectory_csv(ss);
    FAIL();
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}
