#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "usq/metrics.hpp"
#include "usq/neighbor_regions.hpp"
#include "usq/quadtree.hpp"
#include "usq/sim.hpp"
#include "usq/skipping.hpp"

namespace usq {

enum class StrategyKind { Pairwise, Rq, Usq };

[[nodiscard]] inline std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::Pairwise: return "pairwise";
    case StrategyKind::Rq: return "rq";
    case StrategyKind::Usq: return "usq";
  }
  return "?";
}

[[nodiscard]] inline std::optional<StrategyKind> parse_strategy(std::string_view s) noexcept {
  if (s == "pairwise") return StrategyKind::Pairwise;
  if (s == "rq") return StrategyKind::Rq;
  if (s == "usq") return StrategyKind::Usq;
  return std::nullopt;
}

struct StrategyConfig {
  Rect world = Rect::world({0.0, 0.0}, {1.0, 1.0});
  SafetyParams safety;
  std::size_t capacity = 2;
  std::uint32_t depth_cap = 16;
};

struct StepStats {
  std::uint64_t checks = 0;        // predicate evaluations
  std::uint64_t tree_updates = 0;  // insertions into the tree, fresh or incremental
};

/// Shared interface of the broad-phase engines. Robots are passed as a span
/// whose element i has id i. Each call appends the colliding pairs it found
/// to `out`, sorted by pair, and accounts its own time in `timers`.
class Strategy {
 public:
  virtual ~Strategy() = default;
  [[nodiscard]] virtual StrategyKind kind() const noexcept = 0;
  virtual void init(std::span<Robot> robots, PhaseTimers& timers) = 0;
  virtual StepStats step(std::span<Robot> robots, std::int64_t timestep, PhaseTimers& timers,
                         std::vector<CollisionReport>& out) = 0;
  [[nodiscard]] virtual std::size_t node_count() const noexcept { return 0; }
};

namespace detail {

inline void require_dense_ids(std::span<const Robot> robots) {
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (robots[i].id != i) throw std::invalid_argument("Strategy: robot ids must equal their index");
  }
}

inline void check_pair(std::span<const Robot> robots, RobotId a, RobotId b, double r, std::int64_t t,
                       StepStats& stats, std::vector<CollisionReport>& out) {
  ++stats.checks;
  if (collision_predicate(robots[a].pos, robots[b].pos, r)) {
    const RobotPair pair(a, b);
    out.push_back({t, pair, {robots[pair.a].pos, robots[pair.b].pos}});
  }
}

inline void sort_step_reports(std::vector<CollisionReport>& out, std::size_t from) {
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(from), out.end(),
            [](const CollisionReport& x, const CollisionReport& y) { return x.pair < y.pair; });
}

inline void check_leaf(std::span<const Robot> robots, const std::vector<RobotId>& occ, double r,
                       std::int64_t t, StepStats& stats, std::vector<CollisionReport>& out) {
  for (std::size_t i = 0; i < occ.size(); ++i) {
    for (std::size_t j = i + 1; j < occ.size(); ++j) check_pair(robots, occ[i], occ[j], r, t, stats, out);
  }
}

}  // namespace detail

/// Every unordered pair, every step.
class PairwiseStrategy final : public Strategy {
 public:
  explicit PairwiseStrategy(StrategyConfig cfg) : cfg_(std::move(cfg)) {}

  [[nodiscard]] StrategyKind kind() const noexcept override { return StrategyKind::Pairwise; }

  void init(std::span<Robot> robots, PhaseTimers&) override { detail::require_dense_ids(robots); }

  StepStats step(std::span<Robot> robots, std::int64_t t, PhaseTimers& timers,
                 std::vector<CollisionReport>& out) override {
    ScopedPhase total(timers, Phase::Collision);
    StepStats stats;
    const std::size_t from = out.size();
    const auto n = static_cast<RobotId>(robots.size());
    for (RobotId a = 0; a < n; ++a) {
      for (RobotId b = a + 1; b < n; ++b) detail::check_pair(robots, a, b, cfg_.safety.r, t, stats, out);
    }
    detail::sort_step_reports(out, from);
    return stats;
  }

 private:
  StrategyConfig cfg_;
};

/// Regenerating quad-tree: a fresh tree every step, pairs checked only
/// inside each leaf. No neighbor checks and no skipping, so pairs that
/// straddle a leaf border are never examined.
class RegeneratingStrategy final : public Strategy {
 public:
  explicit RegeneratingStrategy(StrategyConfig cfg) : cfg_(std::move(cfg)) {}

  [[nodiscard]] StrategyKind kind() const noexcept override { return StrategyKind::Rq; }

  void init(std::span<Robot> robots, PhaseTimers&) override { detail::require_dense_ids(robots); }

  StepStats step(std::span<Robot> robots, std::int64_t t, PhaseTimers& timers,
                 std::vector<CollisionReport>& out) override {
    ScopedPhase total(timers, Phase::Collision);
    StepStats stats;
    {
      ScopedPhase build(timers, Phase::Tree);
      tree_.emplace(cfg_.world, cfg_.capacity, cfg_.depth_cap);
      for (const Robot& r : robots) tree_->insert(r.id, r.pos);
      stats.tree_updates = robots.size();
    }
    const std::size_t from = out.size();
    tree_->for_each_occupied_leaf([&](auto, const auto& leaf) {
      detail::check_leaf(robots, leaf.occupants, cfg_.safety.r, t, stats, out);
    });
    detail::sort_step_reports(out, from);
    return stats;
  }

  [[nodiscard]] std::size_t node_count() const noexcept override { return tree_ ? tree_->node_count() : 0; }

 private:
  StrategyConfig cfg_;
  std::optional<QuadTree<RobotId>> tree_;
};

/// Incrementally updated quad-tree with update and check skipping.
///
/// Per step: robots whose skip counter is zero are re-indexed (remove and
/// add); every leaf holding such a robot has all its pairs checked; those
/// robots, when within min_thres of their leaf border, check the robots
/// found in their neighbor regions; finally their counters are recomputed
/// while every other counter is decremented.
///
/// A split redistributes occupants by their indexed positions. A skipping
/// robot caught in a split is re-indexed at its true position and its
/// counter reset, since its skip was only valid for the leaf it was
/// computed in.
class UsqStrategy final : public Strategy {
 public:
  explicit UsqStrategy(StrategyConfig cfg) : cfg_(std::move(cfg)) {}

  [[nodiscard]] StrategyKind kind() const noexcept override { return StrategyKind::Usq; }

  void init(std::span<Robot> robots, PhaseTimers& timers) override {
    detail::require_dense_ids(robots);
    ScopedPhase total(timers, Phase::Collision);
    ScopedPhase build(timers, Phase::Tree);
    tree_.emplace(cfg_.world, cfg_.capacity, cfg_.depth_cap);
    for (Robot& r : robots) {
      tree_->insert(r.id, r.pos);
      r.skip.num_skip = 0;
    }
    d_border_.assign(robots.size(), 0.0);
  }

  StepStats step(std::span<Robot> robots, std::int64_t t, PhaseTimers& timers,
                 std::vector<CollisionReport>& out) override {
    if (!tree_ || tree_->size() != robots.size()) {
      throw std::logic_error("UsqStrategy: tree and robot list are out of sync");
    }
    ScopedPhase total(timers, Phase::Collision);
    StepStats stats;
    const double r = cfg_.safety.r;
    const std::size_t from = out.size();

    {
      ScopedPhase update(timers, Phase::Tree);
      work_.clear();
      for (const Robot& rb : robots) {
        if (rb.skip.active()) work_.push_back(rb.id);
      }
      for (std::size_t k = 0; k < work_.size(); ++k) {
        const RobotId id = work_[k];
        displaced_.clear();
        tree_->update_position(id, robots[id].pos, &displaced_);
        ++stats.tree_updates;
        for (RobotId d : displaced_) {
          if (!robots[d].skip.active()) {
            robots[d].skip.num_skip = 0;
            work_.push_back(d);
          }
        }
      }
    }

    // Leaves whose minimum skip counter is zero.
    leaves_.clear();
    for (const Robot& rb : robots) {
      if (rb.skip.active()) leaves_.push_back(tree_->leaf_id_of(rb.id));
    }
    std::sort(leaves_.begin(), leaves_.end());
    leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
    for (auto leaf : leaves_) detail::check_leaf(robots, tree_->node(leaf).occupants, r, t, stats, out);

    for (const Robot& rb : robots) {
      if (rb.skip.active()) d_border_[rb.id] = dist_to_rect_border(rb.pos, tree_->leaf_of(rb.id).bounds);
    }

    {
      ScopedPhase neighbors(timers, Phase::Neighbor);
      candidates_.clear();
      const double min_thres = cfg_.safety.min_thres();
      for (const Robot& rb : robots) {
        if (!rb.skip.active() || !(d_border_[rb.id] < min_thres)) continue;
        const auto own_leaf = tree_->leaf_id_of(rb.id);
        const auto regions =
            build_neighbor_regions(rb.pos, rb.predicted[1], tree_->node(own_leaf).bounds, cfg_.safety, cfg_.world);
        for (const NeighborRegion& region : regions) {
          found_.clear();
          tree_->query_region(region.rect, found_, stack_);
          for (RobotId other : found_) {
            if (other == rb.id || tree_->leaf_id_of(other) == own_leaf) continue;
            candidates_.push_back(RobotPair(rb.id, other));
          }
        }
      }
      // A pair reached from both sides, or through overlapping regions, is
      // checked once.
      std::sort(candidates_.begin(), candidates_.end(),
                [](const RobotPair& a, const RobotPair& b) { return a.key() < b.key(); });
      candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
      for (const RobotPair& p : candidates_) detail::check_pair(robots, p.a, p.b, r, t, stats, out);
    }

    for (Robot& rb : robots) {
      if (!rb.skip.active()) {
        --rb.skip.num_skip;
        continue;
      }
      double d_robots = std::numeric_limits<double>::infinity();
      for (RobotId other : tree_->leaf_of(rb.id).occupants) {
        if (other != rb.id) d_robots = std::min(d_robots, distance(rb.pos, robots[other].pos));
      }
      rb.skip.num_skip = compute_skip(d_border_[rb.id], d_robots, cfg_.safety);
    }

    detail::sort_step_reports(out, from);
    return stats;
  }

  [[nodiscard]] std::size_t node_count() const noexcept override { return tree_ ? tree_->node_count() : 0; }
  [[nodiscard]] const QuadTree<RobotId>& tree() const { return tree_.value(); }

 private:
  StrategyConfig cfg_;
  std::optional<QuadTree<RobotId>> tree_;
  std::vector<RobotId> work_;
  std::vector<RobotId> displaced_;
  std::vector<QuadTree<RobotId>::NodeId> leaves_;
  std::vector<double> d_border_;
  std::vector<RobotId> found_;
  std::vector<QuadTree<RobotId>::NodeId> stack_;
  std::vector<RobotPair> candidates_;
};

[[nodiscard]] inline std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyConfig& cfg) {
  switch (kind) {
    case StrategyKind::Pairwise: return std::make_unique<PairwiseStrategy>(cfg);
    case StrategyKind::Rq: return std::make_unique<RegeneratingStrategy>(cfg);
    case StrategyKind::Usq: return std::make_unique<UsqStrategy>(cfg);
  }
  throw std::invalid_argument("make_strategy: unknown strategy");
}

}  // namespace usq
