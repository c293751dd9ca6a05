#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "usq/geometry.hpp"

namespace usq {

/// Circle-circle overlap test: centers strictly closer than two radii.
[[nodiscard]] inline bool collision_predicate(Vec2 a, Vec2 b, double r) noexcept {
  return distance(a, b) < 2.0 * r;
}

/// Robot radius, worst-case displacement per timestep and the user safety
/// margin. Everything derived from them (the border band, the neighbor
/// region extent, skip counts) assumes no robot ever moves further than
/// `max_dist_traveled` in one step.
struct SafetyParams {
  double r = 0.5;
  double max_dist_traveled = 0.2;
  double epsilon = 0.05;

  SafetyParams() = default;
  SafetyParams(double radius, double mdt, double eps) : r(radius), max_dist_traveled(mdt), epsilon(eps) {
    validate();
  }

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("SafetyParams: r must be > 0");
    if (!(max_dist_traveled >= 0.0) || !std::isfinite(max_dist_traveled)) {
      throw std::invalid_argument("SafetyParams: max_dist_traveled must be >= 0");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("SafetyParams: epsilon must be >= 0");
    }
  }

  /// Closest a robot may sit to its quadrant border and still be sure no
  /// robot across that border can reach it within the next step.
  [[nodiscard]] double min_thres() const noexcept { return 2.0 * r + max_dist_traveled + epsilon; }

  /// Depth of a neighbor search region; its width along the border is twice
  /// this.
  [[nodiscard]] double region_extent() const noexcept {
    return 2.0 * r + 2.0 * max_dist_traveled + epsilon;
  }
};

[[nodiscard]] inline double min_threshold(const SafetyParams& p) noexcept { return p.min_thres(); }
[[nodiscard]] inline double region_extent(const SafetyParams& p) noexcept { return p.region_extent(); }

using SkipCount = std::uint32_t;

/// Upper bound on any computed skip; only reached when a robot is alone in
/// a huge leaf or nothing moves at all.
inline constexpr SkipCount kMaxSkip = 1U << 20;

/// Number of consecutive timesteps a robot may stay unindexed and initiate
/// no collision checks.
struct SkipState {
  SkipCount num_skip = 0;

  [[nodiscard]] bool active() const noexcept { return num_skip == 0; }
};

namespace detail {

inline SkipCount floor_steps(double slack, double per_step) noexcept {
  if (!(slack >= 0.0)) return 0;
  if (per_step <= 0.0 || std::isinf(slack)) return kMaxSkip;
  const double k = std::floor(slack / per_step);
  return k >= static_cast<double>(kMaxSkip) ? kMaxSkip : static_cast<SkipCount>(k);
}

}  // namespace detail

/// Skip count for a robot at `d_border` from its leaf border and `d_robots`
/// from the nearest other occupant of its leaf (infinity when alone).
///
/// Robot-robot: both robots may close at max speed, so the gap shrinks by
/// 2 * max_dist_traveled per step and must stay at least 2r + epsilon.
/// Border: only this robot moves, and it must stay at least min_thres away.
[[nodiscard]] inline SkipCount compute_skip(double d_border, double d_robots, const SafetyParams& p) noexcept {
  const SkipCount by_robots =
      detail::floor_steps(d_robots - 2.0 * p.r - p.epsilon, 2.0 * p.max_dist_traveled);
  const SkipCount by_border = detail::floor_steps(d_border - p.min_thres(), p.max_dist_traveled);
  return std::min(by_robots, by_border);
}

}  // namespace usq
