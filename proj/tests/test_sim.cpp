#include <gtest/gtest.h>

#include <random>

#include "usq/sim.hpp"

using namespace usq;

namespace {

const KinematicParams kKin;

}  // namespace

TEST(ControllerStep, StraightLine) {
  Robot r = make_robot(0, {0, 0}, {10, 0}, 0.5, kKin);
  controller_step(r, kKin);
  EXPECT_NEAR(r.pos.x, 0.2, 1e-12);
  EXPECT_NEAR(r.pos.y, 0.0, 1e-12);
  EXPECT_FALSE(r.reached);
  EXPECT_NEAR(r.predicted[0].x, 0.4, 1e-12);
  EXPECT_NEAR(r.predicted[1].x, 0.6, 1e-12);
}

TEST(ControllerStep, LandsOnGoal) {
  Robot r = make_robot(0, {0, 0}, {0.15, 0}, 0.5, kKin);
  controller_step(r, kKin);
  EXPECT_EQ(r.pos, (Vec2{0.15, 0}));
  EXPECT_TRUE(r.reached);
  const Robot again = r;
  controller_step(r, kKin);
  EXPECT_EQ(r.pos, again.pos);
}

TEST(ControllerStep, TurnRateLimited) {
  Robot r = make_robot(0, {0, 0}, {10, 0}, 0.5, kKin);
  r.goal = {-10, 0};
  controller_step(r, kKin);
  EXPECT_NEAR(std::abs(r.heading), std::numbers::pi * kKin.dt, 1e-12);
}

TEST(ControllerStep, DisplacementBoundFuzz) {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> u(-50, 50), ang(-10, 10), vmax(0.1, 5), dt(0.01, 0.5);
  for (int i = 0; i < 10000; ++i) {
    KinematicParams kp;
    kp.v_max = vmax(gen);
    kp.dt = dt(gen);
    Robot r = make_robot(0, {u(gen), u(gen)}, {u(gen), u(gen)}, 0.5, kp);
    r.heading = ang(gen);
    const Vec2 before = r.pos;
    controller_step(r, kp);
    ASSERT_LE(distance(before, r.pos), kp.max_dist_traveled() + 1e-9);
    ASSERT_LE(r.speed, kp.v_max + 1e-12);
  }
}

TEST(AllReached, Examples) {
  std::vector<Robot> robots{make_robot(0, {1, 1}, {1, 1}, 0.5, kKin), make_robot(1, {2, 2}, {2, 2}, 0.5, kKin)};
  EXPECT_TRUE(all_reached(robots));
  robots[1].pos = {7, 2};
  EXPECT_FALSE(all_reached(robots));
  EXPECT_TRUE(all_reached(std::span<const Robot>{}));
}

TEST(GenEnvironment, CircleLayout) {
  const auto robots = gen_environment({EnvKind::Circle, 4, 0}, 0.5, kKin);
  ASSERT_EQ(robots.size(), 4U);
  const Vec2 expected[4] = {{150, 0}, {0, 150}, {-150, 0}, {0, -150}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(robots[i].pos.x, expected[i].x, 1e-9);
    EXPECT_NEAR(robots[i].pos.y, expected[i].y, 1e-9);
    EXPECT_NEAR(robots[i].goal.x, robots[i].pos.x, 0);
    EXPECT_NEAR(robots[i].goal.y, -robots[i].pos.y, 0);
  }
  EXPECT_NEAR(robots[1].goal.y, -150, 1e-9);
}

TEST(GenEnvironment, CircleTrajectoriesAreVerticalMirrorsCrossingTheAxis) {
  const auto robots = gen_environment({EnvKind::Circle, 20, 0}, 0.5, kKin);
  for (const Robot& r : robots) {
    EXPECT_NEAR(distance(r.pos, {0, 0}), 150, 1e-9);
    EXPECT_TRUE(world_for(EnvKind::Circle).contains(r.pos));
  }
}

TEST(GenEnvironment, SeedDeterminism) {
  const Environment env{EnvKind::Sparse, 5, 42};
  const auto a = gen_environment(env, 0.5, kKin);
  const auto b = gen_environment(env, 0.5, kKin);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pos, b[i].pos);
    EXPECT_EQ(a[i].goal, b[i].goal);
  }
  const auto c = gen_environment({EnvKind::Sparse, 5, 43}, 0.5, kKin);
  EXPECT_NE(a[0].pos, c[0].pos);
}

TEST(GenEnvironment, DenseStartsSeparated) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto robots = gen_environment({EnvKind::Dense, 50, seed}, 0.5, kKin);
    const Rect world = world_for(EnvKind::Dense);
    for (std::size_t i = 0; i < robots.size(); ++i) {
      EXPECT_TRUE(world.contains(robots[i].pos));
      EXPECT_TRUE(world.contains(robots[i].goal));
      EXPECT_GT(robots[i].pos.x, 0);
      EXPECT_LT(robots[i].pos.x, 85);
      for (std::size_t j = i + 1; j < robots.size(); ++j) {
        ASSERT_GT(distance(robots[i].pos, robots[j].pos), 1.0);
        ASSERT_GT(distance(robots[i].goal, robots[j].goal), 1.0);
      }
    }
  }
}

TEST(GenEnvironment, CrowdedWorldFails) {
  EXPECT_THROW((void)gen_environment({EnvKind::Dense, 20000, 0}, 0.5, kKin), std::runtime_error);
}

TEST(Rng, PortableStream) {
  // mt19937_64 is fully specified, so its 10000th output is fixed.
  std::mt19937_64 ref(5489);
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng rng(0);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(EnvKind, Names) {
  for (auto k : {EnvKind::Sparse, EnvKind::Dense, EnvKind::Circle}) EXPECT_EQ(parse_env_kind(to_string(k)), k);
  EXPECT_FALSE(parse_env_kind("forest"));
  EXPECT_EQ(world_for(EnvKind::Sparse), Rect::world({0, 0}, {512, 512}));
  EXPECT_EQ(world_for(EnvKind::Dense), Rect::world({0, 0}, {85, 85}));
  EXPECT_EQ(world_for(EnvKind::Circle), Rect::world({-160, -160}, {160, 160}));
}
