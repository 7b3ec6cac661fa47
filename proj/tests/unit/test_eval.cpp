#include "crowdnav/eval/render.hpp"
#include "crowdnav/eval/suites.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace crowdnav;
using namespace crowdnav::eval;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return static_cast<int>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

EpisodeRecord outcome(std::uint64_t seed, sim::Terminal t) {
  EpisodeRecord e;
  e.seed = seed;
  e.outcome = t;
  return e;
}

}  // namespace

TEST(Evaluate, StraightLineWithoutHumans) {
  sim::ScenarioConfig c;
  c.n_humans = 0;
  StraightController straight;
  const EvalReport r = evaluate(straight, c, 20, 100);
  EXPECT_EQ(r.success_rate, 1.0);
  for (const EpisodeRecord& e : r.episodes) {
    const sim::WorldState w = sim::generate_scenario(c, e.seed);
    const double reach = w.robot.goal_distance() - w.robot.rho;
    const int steps = static_cast<int>(std::ceil(reach / (w.robot.v_max * c.dt) - 1e-12));
    EXPECT_EQ(e.steps, steps) << "seed " << e.seed;
    EXPECT_DOUBLE_EQ(e.nav_time, steps * c.dt);
  }
}

TEST(Evaluate, IdleTimesOut) {
  sim::ScenarioConfig c;
  c.n_humans = 0;
  IdleController idle;
  const EvalReport r = evaluate(idle, c, 5, 1);
  EXPECT_EQ(r.timeout_rate, 1.0);
  EXPECT_TRUE(std::isnan(r.mean_nav_time));
  for (const auto& e : r.episodes) EXPECT_EQ(e.steps, c.horizon);
}

TEST(Evaluate, RateArithmetic) {
  std::vector<EpisodeRecord> eps;
  std::uint64_t s = 0;
  for (int i = 0; i < 430; ++i) eps.push_back(outcome(s++, sim::Terminal::ReachGoal));
  for (int i = 0; i < 40; ++i) eps.push_back(outcome(s++, sim::Terminal::Collision));
  for (int i = 0; i < 30; ++i) eps.push_back(outcome(s++, sim::Terminal::Timeout));
  const EvalReport r = summarize("x", eps);
  EXPECT_DOUBLE_EQ(r.success_rate, 0.86);
  EXPECT_DOUBLE_EQ(r.collision_rate, 0.08);
  EXPECT_NEAR(r.timeout_rate, 0.06, 1e-15);
  EXPECT_EQ(r.success_rate + r.collision_rate + r.timeout_rate, 1.0);
}

TEST(Evaluate, RatesSumToOneForEverySplit) {
  for (int n = 1; n <= 60; ++n)
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        std::vector<EpisodeRecord> eps;
        for (int i = 0; i < n; ++i)
          eps.push_back(outcome(static_cast<std::uint64_t>(i),
                                i < a ? sim::Terminal::ReachGoal
                                      : (i < a + b ? sim::Terminal::Collision : sim::Terminal::Timeout)));
        const EvalReport r = summarize("x", eps);
        ASSERT_EQ(r.success_rate + r.collision_rate + r.timeout_rate, 1.0) << n << " " << a << " " << b;
      }
}

TEST(Evaluate, UnfinishedEpisodeRejected) {
  EXPECT_THROW(summarize("x", {outcome(1, sim::Terminal::None)}), ContractViolation);
}

TEST(Evaluate, DeterministicAndSeedSorted) {
  const auto c = *suite_config("fov-90");
  OrcaController a, b;
  const EvalReport r1 = evaluate(a, c, 6, 50, true);
  const EvalReport r2 = evaluate(b, c, 6, 50, true);
  ASSERT_EQ(r1.episodes.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(r1.episodes[i].seed, 50 + i);
    EXPECT_EQ(r1.episodes[i].rows, r2.episodes[i].rows);
    EXPECT_EQ(r1.episodes[i].outcome, r2.episodes[i].outcome);
  }
  EXPECT_EQ(report_summary_json(r1, "fov-90"), report_summary_json(r2, "fov-90"));
}

TEST(Evaluate, BaselinesByName) {
  for (const auto& n : baseline_names()) EXPECT_NE(make_baseline(n, {}), nullptr) << n;
  EXPECT_EQ(make_baseline("nobody", {}), nullptr);
}

TEST(Suites, Definitions) {
  EXPECT_EQ(suite_config("fov-180")->fov_deg, 180.0);
  EXPECT_EQ(suite_config("fov-180")->n_humans, 5);
  const auto g = *suite_config("group-15");
  EXPECT_EQ(g.env_kind, sim::EnvKind::Group);
  EXPECT_EQ(g.n_humans, 15);
  EXPECT_EQ(g.n_static_humans(), 9);
  EXPECT_FALSE(suite_config("fov-45").has_value());
  for (const auto& n : suite_names()) EXPECT_NO_THROW(sim::generate_scenario(*suite_config(n), 1)) << n;
}

TEST(Export, RowsWedgeAndRepeatability) {
  sim::ScenarioConfig c = *suite_config("fov-90");
  c.horizon = 10;
  IdleController idle;
  const EpisodeRecord rec = run_episode(idle, c, 3, true);
  ASSERT_EQ(rec.steps, 10);
  EXPECT_EQ(rec.rows.size(), 10u * (c.n_humans + 1));

  const auto dir = std::filesystem::temp_directory_path() / "crowdnav_test_eval";
  std::filesystem::create_directories(dir);
  export_trajectory(rec, dir / "a");
  export_trajectory(rec, dir / "b");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
  const std::string svg = slurp(dir / "a.svg");
  EXPECT_NE(svg.find("<polygon class=\"fov\" data-fov-deg=\"90.000\""), std::string::npos);
  EXPECT_EQ(count(svg, "<path "), c.n_humans + 1);
  EXPECT_EQ(count(svg, ">S</text>"), c.n_humans + 1);

  std::ifstream csv(dir / "a.csv");
  EXPECT_EQ(sim::read_trajectory_csv(csv), rec.rows);
}

TEST(Export, GroupTwentyHasTwentyOnePaths) {
  sim::ScenarioConfig c = *suite_config("group-20");
  c.horizon = 4;
  IdleController idle;
  const EpisodeRecord rec = run_episode(idle, c, 1, true);
  std::ostringstream os;
  write_svg(os, scene_from_record(rec));
  EXPECT_EQ(count(os.str(), "<path "), 21);
  EXPECT_NE(os.str().find("<circle class=\"fov\" data-fov-deg=\"360.000\""), std::string::npos);
}

TEST(Export, SingleAgentCsv) {
  std::stringstream in("t,agent_id,px,py,vx,vy,radius,visible_flag\n1,0,0.25,0,1,0,0.3,1\n2,0,0.5,0,1,0,0.3,1\n");
  std::ostringstream os;
  write_svg(os, scene_from_rows(sim::read_trajectory_csv(in)));
  const std::string svg = os.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<path "), 1);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Export, RequiresRecordedRows) {
  EXPECT_THROW(export_trajectory(EpisodeRecord{}, std::filesystem::temp_directory_path() / "none"),
               ContractViolation);
}
