#include <gtest/gtest.h>

#include <random>

#include "usq/skipping.hpp"

using namespace usq;

TEST(CollisionPredicate, Examples) {
  EXPECT_TRUE(collision_predicate({0, 0}, {0.9, 0}, 0.5));
  EXPECT_FALSE(collision_predicate({0, 0}, {1.0, 0}, 0.5));
  EXPECT_FALSE(collision_predicate({0, 0}, {0.6, 0.8}, 0.5));
}

TEST(SafetyParams, Thresholds) {
  EXPECT_NEAR(min_threshold(SafetyParams(0.5, 0.2, 0.05)), 1.25, 1e-12);
  EXPECT_NEAR(min_threshold(SafetyParams(0.5, 0.0, 0.0)), 1.0, 1e-12);
  EXPECT_NEAR(min_threshold(SafetyParams(1.0, 0.5, 0.1)), 2.6, 1e-12);
  EXPECT_NEAR(region_extent(SafetyParams(0.5, 0.2, 0.05)), 1.45, 1e-12);
  EXPECT_NEAR(region_extent(SafetyParams(0.5, 0.0, 0.0)), 1.0, 1e-12);
}

TEST(SafetyParams, ExtentNeverBelowThreshold) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const SafetyParams p(u(gen) + 1e-3, u(gen), u(gen));
    EXPECT_GE(p.region_extent(), p.min_thres());
  }
}

TEST(SafetyParams, Validation) {
  EXPECT_THROW(SafetyParams(0.0, 0.2, 0.05), std::invalid_argument);
  EXPECT_THROW(SafetyParams(0.5, -0.1, 0.05), std::invalid_argument);
  EXPECT_THROW(SafetyParams(0.5, 0.2, -1.0), std::invalid_argument);
}

namespace {

// Two robots starting `gap` apart and driving straight at each other at
// full speed. Returns the first step at which their separation drops below
// `band`, or -1 if that never happens within `steps`.
int first_breach(double gap, double band, double mdt, int steps) {
  double a = 0.0;
  double b = gap;
  for (int k = 1; k <= steps; ++k) {
    a += mdt;
    b -= mdt;
    if (b - a < band) return k;
  }
  return -1;
}

}  // namespace

TEST(ComputeSkip, HeadOnExample) {
  const SafetyParams p(0.5, 0.2, 0.05);
  EXPECT_EQ(compute_skip(5.0, 3.0, p), 4U);
  // Oracle: closing head-on, four steps are safe and the fifth is not.
  EXPECT_EQ(first_breach(3.0, 2 * p.r + p.epsilon, p.max_dist_traveled, 4), -1);
  EXPECT_EQ(first_breach(3.0, 2 * p.r + p.epsilon, p.max_dist_traveled, 5), 5);
  // After 5 steps the gap is 1.0: inside the margin, touching but not yet
  // overlapping under the strict predicate.
  EXPECT_NEAR(3.0 - 10 * p.max_dist_traveled, 1.0, 1e-12);
}

TEST(ComputeSkip, ZeroCases) {
  const SafetyParams p(0.5, 0.2, 0.05);
  EXPECT_EQ(compute_skip(10.0, 1.05, p), 0U);
  for (double d : {0.0, 0.5, 1.1, 100.0}) EXPECT_EQ(compute_skip(1.0, d, p), 0U);
  EXPECT_EQ(compute_skip(0.0, 0.0, p), 0U);
}

TEST(ComputeSkip, AloneUsesBorderOnly) {
  const SafetyParams p(0.5, 0.2, 0.05);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(compute_skip(5.0, inf, p), 18U);
  EXPECT_EQ(compute_skip(inf, inf, p), kMaxSkip);
}

TEST(ComputeSkip, StaticRobotsSaturate) {
  const SafetyParams p(0.5, 0.0, 0.05);
  EXPECT_EQ(compute_skip(2.0, 2.0, p), kMaxSkip);
  EXPECT_EQ(compute_skip(1.0, 2.0, p), 0U);
}

TEST(ComputeSkip, FuzzAgainstWorstCaseMotion) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> radius(0.05, 2.0), mdt(0.01, 1.0), eps(0.0, 0.5), dist(0.0, 40.0);
  for (int i = 0; i < 2000; ++i) {
    const SafetyParams p(radius(gen), mdt(gen), eps(gen));
    const double db = dist(gen), dr = dist(gen);
    const SkipCount k = compute_skip(db, dr, p);
    // Skipped steps are safe.
    double gap = dr, border = db;
    for (SkipCount s = 0; s < k; ++s) {
      gap -= 2 * p.max_dist_traveled;
      border -= p.max_dist_traveled;
      ASSERT_GE(gap, 2 * p.r + p.epsilon - 1e-9);
      ASSERT_GE(border, p.min_thres() - 1e-9);
    }
    // And the count is tight: one more step would breach one of the bands.
    const bool robot_next = dr - 2 * p.max_dist_traveled * (k + 1) < 2 * p.r + p.epsilon - 1e-9;
    const bool border_next = db - p.max_dist_traveled * (k + 1) < p.min_thres() - 1e-9;
    EXPECT_TRUE(robot_next || border_next) << db << " " << dr;
  }
}

TEST(SkipState, ActiveOnlyAtZero) {
  SkipState s;
  EXPECT_TRUE(s.active());
  s.num_skip = 3;
  EXPECT_FALSE(s.active());
}
