#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "usq/geometry.hpp"
#include "usq/skipping.hpp"

namespace usq {

enum class RegionKind {
  Side,           // 2x-by-x band beyond a leaf edge
  CornerPrimary,  // x-by-x square in the diagonal neighbor quadrant
  CornerExtra,    // band in the lateral neighbor quadrant, next to the diagonal
};

[[nodiscard]] inline std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Side: return "side";
    case RegionKind::CornerPrimary: return "corner-primary";
    case RegionKind::CornerExtra: return "corner-extra";
  }
  return "?";
}

struct NeighborRegion {
  Rect rect;
  RegionKind kind;
  Edge edge;  // leaf edge the region lies beyond (for corners: the lateral edge)
};

namespace detail {

inline bool is_vertical(Edge e) noexcept { return e == Edge::Left || e == Edge::Right; }

inline Edge opposite(Edge e) noexcept {
  switch (e) {
    case Edge::Left: return Edge::Right;
    case Edge::Right: return Edge::Left;
    case Edge::Bottom: return Edge::Top;
    case Edge::Top: return Edge::Bottom;
  }
  return e;
}

inline std::array<Edge, 2> adjacent(Edge e) noexcept {
  if (is_vertical(e)) return {Edge::Bottom, Edge::Top};
  return {Edge::Left, Edge::Right};
}

struct Interval {
  double lo;
  double hi;
};

// Outward slab of thickness `depth` beyond `e`, on the axis normal to `e`.
inline Interval beyond(const Rect& leaf, Edge e, double depth) noexcept {
  switch (e) {
    case Edge::Left: return {leaf.min.x - depth, leaf.min.x};
    case Edge::Right: return {leaf.max.x, leaf.max.x + depth};
    case Edge::Bottom: return {leaf.min.y - depth, leaf.min.y};
    case Edge::Top: return {leaf.max.y, leaf.max.y + depth};
  }
  return {0.0, 0.0};
}

// From `reach` behind `pos` up to `e`, on the leaf's side of `e`.
inline Interval inside_towards(const Rect& leaf, Edge e, Vec2 pos, double reach) noexcept {
  switch (e) {
    case Edge::Left: return {leaf.min.x, pos.x + reach};
    case Edge::Right: return {pos.x - reach, leaf.max.x};
    case Edge::Bottom: return {leaf.min.y, pos.y + reach};
    case Edge::Top: return {pos.y - reach, leaf.max.y};
  }
  return {0.0, 0.0};
}

inline double along(Vec2 p, Edge e) noexcept { return is_vertical(e) ? p.y : p.x; }

inline double corner_along(const Rect& leaf, Edge lateral) noexcept {
  switch (lateral) {
    case Edge::Left: return leaf.min.x;
    case Edge::Right: return leaf.max.x;
    case Edge::Bottom: return leaf.min.y;
    case Edge::Top: return leaf.max.y;
  }
  return 0.0;
}

// Rectangle from an interval normal to `e` and one along it.
inline std::optional<Rect> make_rect(Edge e, Interval normal, Interval tangent) {
  Interval xs = is_vertical(e) ? normal : tangent;
  Interval ys = is_vertical(e) ? tangent : normal;
  if (!(xs.lo < xs.hi) || !(ys.lo < ys.hi)) return std::nullopt;
  return Rect({xs.lo, ys.lo}, {xs.hi, ys.hi});
}

}  // namespace detail

/// Search regions in neighboring leaves for a robot at `pos` inside `leaf`
/// whose predicted position two steps ahead is `lookahead`.
///
/// Nothing is returned unless the robot is within min_thres of the leaf
/// border. Otherwise, with x the region extent:
///  - a Side band 2x long and x deep sits beyond the edge the robot's
///    two-step path crosses, centered on the crossing point; if the path
///    stays inside the leaf, beyond the nearest edge, centered on the
///    nearest border point;
///  - for each edge adjacent to that one, when the centre lies within 2r of
///    their shared corner or the robot itself is within x of the adjacent
///    edge, a CornerPrimary x-by-x square in the diagonal quadrant and a
///    CornerExtra band x deep across the adjacent edge covering the lateral
///    quadrant up to the diagonal one;
///  - a Side band beyond the opposite edge, centered on the robot, when the
///    leaf is thin enough for the robot to be within x of it.
/// All regions are clipped to `world`.
[[nodiscard]] inline std::vector<NeighborRegion> build_neighbor_regions(Vec2 pos, Vec2 lookahead,
                                                                        const Rect& leaf,
                                                                        const SafetyParams& p,
                                                                        const Rect& world) {
  std::vector<NeighborRegion> out;
  if (dist_to_rect_border(pos, leaf) >= p.min_thres()) return out;

  const double x = p.region_extent();
  const BorderPoint center = [&] {
    if (auto hit = segment_rect_exit(pos, lookahead, leaf)) return *hit;
    return closest_border(pos, leaf);
  }();
  const Edge primary = center.edge;

  auto emit = [&](std::optional<Rect> r, RegionKind kind, Edge edge) {
    if (!r) return;
    if (auto clipped = clip(*r, world)) out.push_back({*clipped, kind, edge});
  };
  auto side_band = [&](Edge e, double centre_along) {
    return detail::make_rect(e, detail::beyond(leaf, e, x), {centre_along - x, centre_along + x});
  };

  emit(side_band(primary, detail::along(center.point, primary)), RegionKind::Side, primary);

  for (Edge lateral : detail::adjacent(primary)) {
    const double to_corner =
        std::abs(detail::along(center.point, primary) - detail::corner_along(leaf, lateral));
    const bool corner = to_corner < 2.0 * p.r || edge_distance(pos, leaf, lateral) < x;
    if (!corner) continue;
    emit(detail::make_rect(primary, detail::beyond(leaf, primary, x),
                           detail::beyond(leaf, lateral, x)),
         RegionKind::CornerPrimary, lateral);
    emit(detail::make_rect(primary, detail::inside_towards(leaf, primary, pos, x),
                           detail::beyond(leaf, lateral, x)),
         RegionKind::CornerExtra, lateral);
  }

  const Edge far = detail::opposite(primary);
  if (edge_distance(pos, leaf, far) < x) {
    emit(side_band(far, detail::along(pos, far)), RegionKind::Side, far);
  }
  return out;
}

}  // namespace usq
