#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace usq {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) noexcept = default;

  [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
  [[nodiscard]] bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

[[nodiscard]] inline double distance(Vec2 a, Vec2 b) noexcept { return (a - b).norm(); }

/// Border edges of an axis-aligned rectangle. The enumeration order is the
/// tie-break priority used wherever two edges are equally close.
enum class Edge { Left = 0, Right = 1, Bottom = 2, Top = 3 };

inline constexpr std::array<Edge, 4> kEdgePriority{Edge::Left, Edge::Right, Edge::Bottom, Edge::Top};

/// Axis-aligned rectangle with half-open membership: min edges are inside,
/// max edges are outside unless explicitly closed. Only the world root (and
/// the parts of its subdivisions or clips that share its max edges) closes
/// a max edge, so boundary robots stay indexed.
struct Rect {
  Vec2 min;
  Vec2 max;
  bool closed_max_x = false;
  bool closed_max_y = false;

  Rect() = default;
  Rect(Vec2 lo, Vec2 hi, bool close_x = false, bool close_y = false)
      : min(lo), max(hi), closed_max_x(close_x), closed_max_y(close_y) {
    if (!lo.finite() || !hi.finite() || !(lo.x < hi.x) || !(lo.y < hi.y)) {
      throw std::invalid_argument("Rect: degenerate or non-finite bounds");
    }
  }

  /// A world rectangle: both max edges closed.
  static Rect world(Vec2 lo, Vec2 hi) { return Rect(lo, hi, true, true); }

  [[nodiscard]] double width() const noexcept { return max.x - min.x; }
  [[nodiscard]] double height() const noexcept { return max.y - min.y; }
  [[nodiscard]] Vec2 center() const noexcept { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }

  [[nodiscard]] bool contains(Vec2 p) const noexcept {
    const bool in_x = min.x <= p.x && (p.x < max.x || (closed_max_x && p.x == max.x));
    const bool in_y = min.y <= p.y && (p.y < max.y || (closed_max_y && p.y == max.y));
    return in_x && in_y;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

namespace detail {

// Overlap of [a0, a1) and [b0, b1), with either upper end optionally closed.
inline bool intervals_overlap(double a0, double a1, bool a_closed, double b0, double b1,
                              bool b_closed) noexcept {
  const double lo = std::max(a0, b0);
  const bool below_a = lo < a1 || (a_closed && lo == a1);
  const bool below_b = lo < b1 || (b_closed && lo == b1);
  return below_a && below_b;
}

}  // namespace detail

[[nodiscard]] inline bool rects_intersect(const Rect& a, const Rect& b) noexcept {
  return detail::intervals_overlap(a.min.x, a.max.x, a.closed_max_x, b.min.x, b.max.x,
                                   b.closed_max_x) &&
         detail::intervals_overlap(a.min.y, a.max.y, a.closed_max_y, b.min.y, b.max.y,
                                   b.closed_max_y);
}

/// Intersection of `r` with `bounds`; max edges that land on a closed edge
/// of `bounds` inherit its closure. Empty when nothing of positive area is
/// left.
[[nodiscard]] inline std::optional<Rect> clip(const Rect& r, const Rect& bounds) {
  auto upper = [](double a, bool a_closed, double b, bool b_closed) -> std::pair<double, bool> {
    if (a < b) return {a, a_closed};
    if (b < a) return {b, b_closed};
    return {a, a_closed && b_closed};
  };
  const Vec2 lo{std::max(r.min.x, bounds.min.x), std::max(r.min.y, bounds.min.y)};
  const auto [hx, cx] = upper(r.max.x, r.closed_max_x, bounds.max.x, bounds.closed_max_x);
  const auto [hy, cy] = upper(r.max.y, r.closed_max_y, bounds.max.y, bounds.closed_max_y);
  if (!(lo.x < hx) || !(lo.y < hy)) return std::nullopt;
  return Rect(lo, {hx, hy}, cx, cy);
}

/// Perpendicular distance from `p` to `edge` of `r` (positive inside).
[[nodiscard]] inline double edge_distance(Vec2 p, const Rect& r, Edge edge) noexcept {
  switch (edge) {
    case Edge::Left: return p.x - r.min.x;
    case Edge::Right: return r.max.x - p.x;
    case Edge::Bottom: return p.y - r.min.y;
    case Edge::Top: return r.max.y - p.y;
  }
  return 0.0;
}

/// Minimum distance from `p` to the four edges of `r`. A point outside `r`
/// means the caller's index is out of sync with positions.
[[nodiscard]] inline double dist_to_rect_border(Vec2 p, const Rect& r) {
  if (!r.contains(p)) {
    throw std::logic_error("dist_to_rect_border: point lies outside its rectangle");
  }
  double best = edge_distance(p, r, Edge::Left);
  for (Edge e : kEdgePriority) best = std::min(best, edge_distance(p, r, e));
  return best;
}

struct BorderPoint {
  Vec2 point;
  Edge edge;
};

/// Nearest point on the border of `r`; ties go to the earlier edge in
/// kEdgePriority.
[[nodiscard]] inline BorderPoint closest_border(Vec2 p, const Rect& r) {
  Edge best = Edge::Left;
  double best_d = edge_distance(p, r, Edge::Left);
  for (Edge e : kEdgePriority) {
    const double d = edge_distance(p, r, e);
    if (d < best_d) {
      best = e;
      best_d = d;
    }
  }
  switch (best) {
    case Edge::Left: return {{r.min.x, p.y}, best};
    case Edge::Right: return {{r.max.x, p.y}, best};
    case Edge::Bottom: return {{p.x, r.min.y}, best};
    case Edge::Top: return {{p.x, r.max.y}, best};
  }
  return {p, best};
}

[[nodiscard]] inline Vec2 closest_border_point(Vec2 p, const Rect& r) {
  return closest_border(p, r).point;
}

/// First point where the segment p0 -> p1 reaches the border of `r`, with
/// the edge it crosses. Reaching the border exactly at p1 counts as leaving.
[[nodiscard]] inline std::optional<BorderPoint> segment_rect_exit(Vec2 p0, Vec2 p1, const Rect& r) {
  const Vec2 d = p1 - p0;
  double t_best = 2.0;
  Edge edge = Edge::Left;
  auto consider = [&](double t, Edge e) {
    if (t < t_best) {
      t_best = t;
      edge = e;
    }
  };
  // Candidates are visited in tie-break priority order so a corner hit
  // resolves the same way as closest_border.
  if (d.x < 0.0) consider((r.min.x - p0.x) / d.x, Edge::Left);
  if (d.x > 0.0) consider((r.max.x - p0.x) / d.x, Edge::Right);
  if (d.y < 0.0) consider((r.min.y - p0.y) / d.y, Edge::Bottom);
  if (d.y > 0.0) consider((r.max.y - p0.y) / d.y, Edge::Top);
  if (t_best > 1.0) return std::nullopt;
  t_best = std::max(t_best, 0.0);
  Vec2 hit = p0 + d * t_best;
  // Pin the crossed coordinate exactly onto the border.
  switch (edge) {
    case Edge::Left: hit.x = r.min.x; break;
    case Edge::Right: hit.x = r.max.x; break;
    case Edge::Bottom: hit.y = r.min.y; break;
    case Edge::Top: hit.y = r.max.y; break;
  }
  return BorderPoint{hit, edge};
}

[[nodiscard]] inline std::optional<Vec2> segment_rect_exit_point(Vec2 p0, Vec2 p1, const Rect& r) {
  if (auto hit = segment_rect_exit(p0, p1, r)) return hit->point;
  return std::nullopt;
}

[[nodiscard]] inline std::string to_string(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

}  // namespace usq
