#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "usq/geometry.hpp"
#include "usq/quadtree.hpp"
#include "usq/skipping.hpp"

namespace usq {

struct KinematicParams {
  double v_max = 2.0;                          // units / s
  double dt = 0.1;                             // s
  double max_turn_rate = std::numbers::pi;     // rad / s
  double goal_tolerance = 0.1;                 // units

  [[nodiscard]] double max_dist_traveled() const noexcept { return v_max * dt; }

  void validate() const {
    if (!(v_max >= 0.0) || !(dt > 0.0) || !(max_turn_rate >= 0.0) || !(goal_tolerance > 0.0)) {
      throw std::invalid_argument("KinematicParams: v_max, max_turn_rate >= 0 and dt, goal_tolerance > 0");
    }
  }
};

struct Robot {
  RobotId id = 0;
  Vec2 pos;
  double heading = 0.0;  // rad
  double speed = 0.0;    // units / s
  Vec2 goal;
  double radius = 0.5;
  std::array<Vec2, 2> predicted{};  // positions one and two steps ahead under frozen control
  SkipState skip;
  bool reached = false;
};

/// Refreshes `predicted` assuming heading and speed stay as they are.
inline void refresh_prediction(Robot& robot, const KinematicParams& kp) {
  const Vec2 step = Vec2{std::cos(robot.heading), std::sin(robot.heading)} * (robot.speed * kp.dt);
  robot.predicted = {robot.pos + step, robot.pos + step * 2.0};
}

inline Robot make_robot(RobotId id, Vec2 start, Vec2 goal, double radius, const KinematicParams& kp) {
  Robot robot;
  robot.id = id;
  robot.pos = start;
  robot.goal = goal;
  robot.radius = radius;
  const Vec2 to_goal = goal - start;
  const double d = to_goal.norm();
  robot.heading = d > 0.0 ? std::atan2(to_goal.y, to_goal.x) : 0.0;
  robot.reached = d < kp.goal_tolerance;
  robot.speed = robot.reached ? 0.0 : std::min(kp.v_max, d / kp.dt);
  if (robot.reached) {
    robot.predicted = {start, start};
  } else {
    refresh_prediction(robot, kp);
  }
  return robot;
}

namespace detail {

inline double wrap_angle(double a) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace detail

/// One Euler step of a unicycle steering proportionally toward its goal.
///
/// Heading turns toward the goal by at most max_turn_rate * dt, speed is
/// min(v_max, distance / dt), and a robot within one maximal step of its
/// goal lands on it exactly. Reached robots are left untouched.
inline void controller_step(Robot& robot, const KinematicParams& kp) {
  if (robot.reached) return;
  [[maybe_unused]] const Vec2 before = robot.pos;
  const Vec2 to_goal = robot.goal - robot.pos;
  const double d = to_goal.norm();
  if (d <= kp.max_dist_traveled()) {
    robot.pos = robot.goal;
    robot.speed = 0.0;
    robot.reached = true;
    robot.predicted = {robot.goal, robot.goal};
    return;
  }
  const double desired = std::atan2(to_goal.y, to_goal.x);
  const double max_turn = kp.max_turn_rate * kp.dt;
  const double turn = std::clamp(detail::wrap_angle(desired - robot.heading), -max_turn, max_turn);
  robot.heading = detail::wrap_angle(robot.heading + turn);
  robot.speed = std::min(kp.v_max, d / kp.dt);
  robot.pos = robot.pos + Vec2{std::cos(robot.heading), std::sin(robot.heading)} * (robot.speed * kp.dt);
  if (distance(robot.pos, robot.goal) < kp.goal_tolerance) robot.reached = true;
  refresh_prediction(robot, kp);
  assert(distance(before, robot.pos) <= kp.max_dist_traveled() + 1e-9);
}

[[nodiscard]] inline bool all_reached(std::span<const Robot> robots, double goal_tolerance = 0.1) {
  for (const Robot& r : robots) {
    if (!(distance(r.pos, r.goal) < goal_tolerance)) return false;
  }
  return true;
}

enum class EnvKind { Sparse, Dense, Circle };

[[nodiscard]] inline std::string_view to_string(EnvKind k) noexcept {
  switch (k) {
    case EnvKind::Sparse: return "sparse";
    case EnvKind::Dense: return "dense";
    case EnvKind::Circle: return "circle";
  }
  return "?";
}

[[nodiscard]] inline std::optional<EnvKind> parse_env_kind(std::string_view s) noexcept {
  if (s == "sparse") return EnvKind::Sparse;
  if (s == "dense") return EnvKind::Dense;
  if (s == "circle") return EnvKind::Circle;
  return std::nullopt;
}

inline constexpr double kSparseSide = 512.0;
inline constexpr double kDenseSide = 85.0;
inline constexpr double kCircleRadius = 150.0;
inline constexpr double kCircleWorldHalf = 160.0;

[[nodiscard]] inline Rect world_for(EnvKind k) {
  switch (k) {
    case EnvKind::Sparse: return Rect::world({0.0, 0.0}, {kSparseSide, kSparseSide});
    case EnvKind::Dense: return Rect::world({0.0, 0.0}, {kDenseSide, kDenseSide});
    case EnvKind::Circle:
      return Rect::world({-kCircleWorldHalf, -kCircleWorldHalf}, {kCircleWorldHalf, kCircleWorldHalf});
  }
  throw std::invalid_argument("world_for: unknown environment");
}

struct Environment {
  EnvKind kind = EnvKind::Sparse;
  std::uint32_t n_robots = 20;
  std::uint64_t seed = 0;
  std::uint64_t step_limit = 5000;

  [[nodiscard]] Rect world() const { return world_for(kind); }
};

/// Portable uniform doubles from a 64-bit Mersenne Twister; the standard
/// distributions are implementation defined, which would break layouts
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline constexpr int kMaxPlacementAttempts = 10000;

namespace detail {

inline std::vector<Vec2> sample_separated(Rng& rng, const Rect& world, std::uint32_t n, double radius) {
  std::vector<Vec2> points;
  points.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Vec2 c{rng.uniform(world.min.x + radius, world.max.x - radius),
                   rng.uniform(world.min.y + radius, world.max.y - radius)};
      bool clear = true;
      for (const Vec2& q : points) {
        if (!(distance(c, q) > 2.0 * radius)) {
          clear = false;
          break;
        }
      }
      if (clear) {
        points.push_back(c);
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("gen_environment: world too crowded to place robot " + std::to_string(i));
    }
  }
  return points;
}

}  // namespace detail

/// Start/goal layout for `env`. Sparse and dense draw non-overlapping
/// starts and non-overlapping goals uniformly inside the world; circle
/// spaces robots evenly on a radius-150 circle, each heading for its mirror
/// image across the x-axis.
[[nodiscard]] inline std::vector<Robot> gen_environment(const Environment& env, double radius,
                                                        const KinematicParams& kp) {
  std::vector<Robot> robots;
  robots.reserve(env.n_robots);
  if (env.kind == EnvKind::Circle) {
    for (std::uint32_t i = 0; i < env.n_robots; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / env.n_robots;
      const Vec2 start{kCircleRadius * std::cos(angle), kCircleRadius * std::sin(angle)};
      robots.push_back(make_robot(i, start, {start.x, -start.y}, radius, kp));
    }
    return robots;
  }
  const Rect world = env.world();
  Rng rng(env.seed);
  const auto starts = detail::sample_separated(rng, world, env.n_robots, radius);
  const auto goals = detail::sample_separated(rng, world, env.n_robots, radius);
  for (std::uint32_t i = 0; i < env.n_robots; ++i) {
    robots.push_back(make_robot(i, starts[i], goals[i], radius, kp));
  }
  return robots;
}

}  // namespace usq
