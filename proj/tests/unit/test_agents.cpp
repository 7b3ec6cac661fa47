#include "crowdnav/agents/linear_program.hpp"
#include "crowdnav/agents/orca.hpp"
#include "crowdnav/agents/social_force.hpp"
#include "support/head_on.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace crowdnav;
using namespace crowdnav::agents;

namespace {

HalfPlane half_plane(Vec2 point, Vec2 direction) { return {point, direction.normalized()}; }

bool satisfies(const HalfPlane& h, const Vec2& v, double tol = 1e-9) {
  return det2(h.direction, v - h.point) >= -tol;
}

}  // namespace

TEST(LinearProgram, UnconstrainedReturnsTarget) {
  Vec2 r;
  EXPECT_EQ(solve_halfplane_lp({}, 1.0, Vec2(0.3, 0.4), false, r), 0u);
  EXPECT_EQ(r, Vec2(0.3, 0.4));
  solve_halfplane_lp({}, 1.0, Vec2(3, 4), false, r);
  EXPECT_NEAR(r.x(), 0.6, 1e-15);
  EXPECT_NEAR(r.y(), 0.8, 1e-15);
}

TEST(LinearProgram, ProjectsOntoSingleConstraint) {
  // y >= 0.5: facing +x, the upper side is on the left
  const HalfPlane lines[] = {half_plane(Vec2(0, 0.5), Vec2(1, 0))};
  Vec2 r;
  EXPECT_EQ(solve_halfplane_lp(lines, 2.0, Vec2(0.2, 0), false, r), 1u);
  EXPECT_NEAR(r.x(), 0.2, 1e-12);
  EXPECT_NEAR(r.y(), 0.5, 1e-12);
}

TEST(LinearProgram, CornerOfTwoConstraints) {
  const HalfPlane lines[] = {half_plane(Vec2(0, 0.5), Vec2(1, 0)), half_plane(Vec2(0.5, 0), Vec2(0, -1))};
  Vec2 r;
  EXPECT_EQ(solve_halfplane_lp(lines, 2.0, Vec2(0, 0), false, r), 2u);
  EXPECT_NEAR(r.x(), 0.5, 1e-12);
  EXPECT_NEAR(r.y(), 0.5, 1e-12);
}

TEST(LinearProgram, InfeasibleFallsBackToLeastViolation) {
  // y >= 0.5 and y <= -0.5 cannot both hold; the balanced point is y = 0.
  const HalfPlane lines[] = {half_plane(Vec2(0, 0.5), Vec2(1, 0)), half_plane(Vec2(0, -0.5), Vec2(-1, 0))};
  Vec2 r;
  const std::size_t fail = solve_halfplane_lp(lines, 2.0, Vec2(0, 0), false, r);
  ASSERT_EQ(fail, 1u);
  solve_least_violation(lines, fail, 2.0, r);
  EXPECT_NEAR(r.y(), 0.0, 1e-9);
  EXPECT_LE(r.norm(), 2.0 + 1e-12);
}

TEST(LinearProgram, RandomFeasibleResultsSatisfyAll) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<HalfPlane> lines;
    for (int k = 0; k < 4; ++k) {
      // every half-plane contains the origin
      const Vec2 dir = Vec2(u(rng), u(rng)).normalized();
      const Vec2 normal(-dir.y(), dir.x());
      lines.push_back({-0.3 * std::abs(u(rng)) * normal, dir});
    }
    Vec2 r;
    if (solve_halfplane_lp(lines, 1.0, Vec2(u(rng), u(rng)) * 2.0, false, r) != lines.size()) continue;
    ++checked;
    for (const auto& h : lines) EXPECT_TRUE(satisfies(h, r, 1e-9));
    EXPECT_LE(r.norm(), 1.0 + 1e-9);
  }
  EXPECT_GT(checked, 400);
}

TEST(Orca, NoNeighborsGivesPreferredVelocity) {
  AgentView a;
  a.goal = {3, 4};
  a.v_max = 1.0;
  const Vec2 v = orca_velocity(a, {}, OrcaParams{}, 0.25);
  EXPECT_NEAR(v.x(), 0.6, 1e-15);
  EXPECT_NEAR(v.y(), 0.8, 1e-15);
}

TEST(Orca, DoesNotOvershootGoal) {
  AgentView a;
  a.goal = {0.1, 0};
  const Vec2 v = orca_velocity(a, {}, OrcaParams{}, 0.25);
  EXPECT_NEAR(v.x() * 0.25, 0.1, 1e-15);
  EXPECT_EQ(v.y(), 0.0);
}

TEST(Orca, HeadOnPassesAndMirrors) {
  for (double lateral : {0.0, 0.05}) {
    const head_on::Trace tr = head_on::simulate(4.0, lateral, 200);
    EXPECT_GT(tr.d_min, 0.0) << "lateral " << lateral;
    EXPECT_LE(tr.mirror_error, 1e-9) << "lateral " << lateral;
  }
  // an exactly collinear start stalls symmetrically; any offset lets them pass
  EXPECT_NEAR(head_on::simulate(4.0, 0.05, 200).pa.back().x(), 4.0, 1e-9);
  EXPECT_LT(std::abs(head_on::simulate(4.0, 0.0, 200).pa.back().x()), 1.0);
}

TEST(Orca, SpeedNeverExceedsVmax) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    AgentView self;
    self.goal = {u(rng), u(rng)};
    self.velocity = {u(rng) / 3, u(rng) / 3};
    std::vector<AgentView> others(4);
    for (auto& o : others) {
      o.position = {u(rng), u(rng)};
      o.velocity = {u(rng) / 3, u(rng) / 3};
    }
    EXPECT_LE(orca_velocity(self, others, OrcaParams{}, 0.25).norm(), self.v_max + 1e-12);
  }
}

TEST(Orca, RejectsNonPositiveDt) { EXPECT_THROW(orca_velocity(AgentView{}, {}, OrcaParams{}, 0.0), InvalidArgument); }

TEST(SocialForce, RelaxesToPreferredVelocity) {
  AgentView a;
  a.goal = {1e6, 0};
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) a.velocity = social_force_velocity(a, {}, SocialForceParams{}, 0.25, rng);
  EXPECT_NEAR(a.velocity.x(), 1.0, 1e-3);
  EXPECT_NEAR(a.velocity.y(), 0.0, 1e-3);
}

TEST(SocialForce, PushesAwayFromNeighborAhead) {
  AgentView a, b;
  a.goal = {10, 0};
  a.v_max = 10.0;
  b.position = {0.1, 0};
  std::mt19937_64 rng(1);
  const AgentView nb[] = {b};
  const Vec2 with = social_force_velocity(a, nb, SocialForceParams{}, 0.25, rng);
  const Vec2 without = social_force_velocity(a, {}, SocialForceParams{}, 0.25, rng);
  EXPECT_LT(with.x(), without.x());
  EXPECT_LT((with - without).x(), 0.0);
}

TEST(SocialForce, SymmetricNeighborsCancelLaterally) {
  AgentView a, l, r;
  a.goal = {5, 0};
  l.position = {0.5, 0.7};
  r.position = {0.5, -0.7};
  std::mt19937_64 rng(1);
  const AgentView nb[] = {l, r};
  EXPECT_LT(std::abs(social_force_velocity(a, nb, SocialForceParams{}, 0.25, rng).y()), 1e-9);
}

TEST(SocialForce, CoincidentCentresUseRng) {
  AgentView a, b;
  a.goal = b.position = a.position;
  std::mt19937_64 r1(7), r2(7), r3(8);
  const AgentView nb[] = {b};
  const Vec2 v1 = social_force_velocity(a, nb, SocialForceParams{}, 0.25, r1);
  const Vec2 v2 = social_force_velocity(a, nb, SocialForceParams{}, 0.25, r2);
  const Vec2 v3 = social_force_velocity(a, nb, SocialForceParams{}, 0.25, r3);
  EXPECT_EQ(v1, v2);
  EXPECT_NE(v1, v3);
  EXPECT_TRUE(v1.allFinite());
  EXPECT_LE(v1.norm(), a.v_max + 1e-12);
}
