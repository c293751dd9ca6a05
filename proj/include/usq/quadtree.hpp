#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "usq/geometry.hpp"

namespace usq {

using RobotId = std::uint32_t;

/// Quadrant slots of an internal node, in iteration order.
enum class Quadrant : std::uint8_t { NW = 0, NE = 1, SW = 2, SE = 3 };

/// Point-region quad-tree over a fixed world rectangle.
///
/// Leaves hold at most `capacity` identifiers until `depth_cap` is reached,
/// where they accept overflow. Nodes are never pruned: once a region has
/// been split its children stay for the lifetime of the tree, and empty
/// leaves remain in place. Positions are stored per identifier so that
/// splits can redistribute occupants without consulting the caller.
template <typename Id = RobotId>
class QuadTree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kNoChild = std::numeric_limits<NodeId>::max();
  static constexpr NodeId kRoot = 0;

  struct Node {
    Rect bounds;
    std::uint32_t depth = 0;
    NodeId first_child = kNoChild;  // children are stored contiguously: NW, NE, SW, SE
    std::vector<Id> occupants;

    [[nodiscard]] bool is_leaf() const noexcept { return first_child == kNoChild; }
    [[nodiscard]] NodeId child(Quadrant q) const noexcept {
      return first_child + static_cast<NodeId>(q);
    }
  };

  QuadTree(const Rect& world, std::size_t capacity, std::uint32_t depth_cap = 16)
      : capacity_(capacity), depth_cap_(depth_cap) {
    if (capacity < 1) throw std::invalid_argument("QuadTree: capacity must be >= 1");
    if (depth_cap < 1) throw std::invalid_argument("QuadTree: depth_cap must be >= 1");
    nodes_.push_back(Node{world, 0, kNoChild, {}});
  }

  [[nodiscard]] const Rect& world() const noexcept { return nodes_[kRoot].bounds; }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::uint32_t depth_cap() const noexcept { return depth_cap_; }
  [[nodiscard]] std::size_t size() const noexcept { return index_.size(); }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] const Node& root() const noexcept { return nodes_[kRoot]; }
  [[nodiscard]] bool contains(Id id) const { return index_.find(id) != index_.end(); }

  /// Position recorded at the last insert/update of `id`.
  [[nodiscard]] Vec2 position(Id id) const { return entry(id).pos; }

  /// Adds `id` at `pos`, splitting any leaf pushed over capacity. When
  /// `displaced` is given it receives the other identifiers that changed
  /// leaf because of those splits.
  void insert(Id id, Vec2 pos, std::vector<Id>* displaced = nullptr) {
    if (!world().contains(pos)) throw std::out_of_range("QuadTree::insert: position outside world");
    if (contains(id)) throw std::invalid_argument("QuadTree::insert: duplicate identifier");
    const NodeId leaf = descend(pos);
    add_sorted(nodes_[leaf].occupants, id);
    index_.emplace(id, Entry{pos, leaf});
    split_overfull(leaf, id, displaced);
  }

  /// Removes `id`. No node is deleted or merged.
  void remove(Id id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("QuadTree::remove: unknown identifier");
    auto& occ = nodes_[it->second.leaf].occupants;
    occ.erase(std::find(occ.begin(), occ.end(), id));
    index_.erase(it);
  }

  /// Remove-and-add relocation.
  void update_position(Id id, Vec2 pos, std::vector<Id>* displaced = nullptr) {
    if (!contains(id)) throw std::out_of_range("QuadTree::update_position: unknown identifier");
    if (!world().contains(pos)) {
      throw std::out_of_range("QuadTree::update_position: position outside world");
    }
    remove(id);
    insert(id, pos, displaced);
  }

  [[nodiscard]] NodeId leaf_id_of(Id id) const { return entry(id).leaf; }
  [[nodiscard]] const Node& leaf_of(Id id) const { return nodes_[entry(id).leaf]; }

  /// Leaf whose bounds contain `pos`, found by walking down from the root.
  [[nodiscard]] NodeId descend(Vec2 pos) const {
    NodeId n = kRoot;
    while (!nodes_[n].is_leaf()) n = nodes_[n].child(quadrant_of(nodes_[n].bounds, pos));
    return n;
  }

  /// Identifiers whose stored position lies inside `region`, ascending.
  [[nodiscard]] std::vector<Id> query_region(const Rect& region) const {
    std::vector<Id> out;
    std::vector<NodeId> stack;
    query_region(region, out, stack);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Appends matches to `out` unsorted; `stack` is scratch space.
  void query_region(const Rect& region, std::vector<Id>& out, std::vector<NodeId>& stack) const {
    stack.assign(1, kRoot);
    while (!stack.empty()) {
      const NodeId n = stack.back();
      stack.pop_back();
      const Node& node = nodes_[n];
      if (!rects_intersect(node.bounds, region)) continue;
      if (node.is_leaf()) {
        for (Id id : node.occupants) {
          if (region.contains(index_.at(id).pos)) out.push_back(id);
        }
      } else {
        for (NodeId c = node.first_child; c < node.first_child + 4; ++c) stack.push_back(c);
      }
    }
  }

  /// Calls `fn(node_id, node)` for every leaf with at least one occupant,
  /// depth first in NW, NE, SW, SE order.
  template <typename Fn>
  void for_each_occupied_leaf(Fn&& fn) const {
    std::vector<NodeId> stack{kRoot};
    while (!stack.empty()) {
      const NodeId n = stack.back();
      stack.pop_back();
      const Node& node = nodes_[n];
      if (node.is_leaf()) {
        if (!node.occupants.empty()) fn(n, node);
        continue;
      }
      for (NodeId c = node.first_child + 4; c-- > node.first_child;) stack.push_back(c);
    }
  }

  [[nodiscard]] std::vector<NodeId> occupied_leaves() const {
    std::vector<NodeId> out;
    for_each_occupied_leaf([&](NodeId n, const Node&) { out.push_back(n); });
    return out;
  }

  /// Indented one-line-per-node topology dump.
  [[nodiscard]] std::string dump_text() const {
    std::ostringstream os;
    dump_text_rec(os, kRoot);
    return os.str();
  }

  [[nodiscard]] nlohmann::json dump_json() const { return dump_json_rec(kRoot); }

 private:
  struct Entry {
    Vec2 pos;
    NodeId leaf;
  };

  const Entry& entry(Id id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("QuadTree: unknown identifier");
    return it->second;
  }

  static void add_sorted(std::vector<Id>& v, Id id) {
    v.insert(std::lower_bound(v.begin(), v.end(), id), id);
  }

  static Quadrant quadrant_of(const Rect& b, Vec2 p) noexcept {
    const Vec2 mid = b.center();
    const bool north = p.y >= mid.y;
    const bool east = p.x >= mid.x;
    if (north) return east ? Quadrant::NE : Quadrant::NW;
    return east ? Quadrant::SE : Quadrant::SW;
  }

  static Rect child_bounds(const Rect& b, Quadrant q) {
    const Vec2 mid = b.center();
    switch (q) {
      case Quadrant::NW: return Rect({b.min.x, mid.y}, {mid.x, b.max.y}, false, b.closed_max_y);
      case Quadrant::NE: return Rect(mid, b.max, b.closed_max_x, b.closed_max_y);
      case Quadrant::SW: return Rect(b.min, mid, false, false);
      case Quadrant::SE: return Rect({mid.x, b.min.y}, {b.max.x, mid.y}, b.closed_max_x, false);
    }
    return b;
  }

  void split_overfull(NodeId start, Id inserted, std::vector<Id>* displaced) {
    std::vector<NodeId> work{start};
    const std::size_t mark = displaced ? displaced->size() : 0;
    while (!work.empty()) {
      const NodeId n = work.back();
      work.pop_back();
      if (nodes_[n].occupants.size() <= capacity_ || nodes_[n].depth >= depth_cap_) continue;

      const auto first = static_cast<NodeId>(nodes_.size());
      const Rect parent_bounds = nodes_[n].bounds;
      const std::uint32_t child_depth = nodes_[n].depth + 1;
      for (Quadrant q : {Quadrant::NW, Quadrant::NE, Quadrant::SW, Quadrant::SE}) {
        nodes_.push_back(Node{child_bounds(parent_bounds, q), child_depth, kNoChild, {}});
      }
      std::vector<Id> movers = std::move(nodes_[n].occupants);
      nodes_[n].occupants.clear();
      nodes_[n].first_child = first;
      for (Id id : movers) {
        Entry& e = index_.at(id);
        const NodeId c = first + static_cast<NodeId>(quadrant_of(parent_bounds, e.pos));
        add_sorted(nodes_[c].occupants, id);
        e.leaf = c;
        if (displaced && id != inserted) displaced->push_back(id);
      }
      for (NodeId c = first; c < first + 4; ++c) work.push_back(c);
    }
    if (displaced) {
      auto tail = displaced->begin() + static_cast<std::ptrdiff_t>(mark);
      std::sort(tail, displaced->end());
      displaced->erase(std::unique(tail, displaced->end()), displaced->end());
    }
  }

  void dump_text_rec(std::ostringstream& os, NodeId n) const {
    const Node& node = nodes_[n];
    os << std::string(2 * node.depth, ' ') << '[' << node.bounds.min.x << ',' << node.bounds.min.y
       << " .. " << node.bounds.max.x << ',' << node.bounds.max.y << ']';
    if (node.is_leaf()) {
      os << " {";
      for (std::size_t i = 0; i < node.occupants.size(); ++i) {
        os << (i ? " " : "") << node.occupants[i];
      }
      os << "}\n";
      return;
    }
    os << '\n';
    for (NodeId c = node.first_child; c < node.first_child + 4; ++c) dump_text_rec(os, c);
  }

  nlohmann::json dump_json_rec(NodeId n) const {
    const Node& node = nodes_[n];
    nlohmann::json j;
    j["bounds"] = {node.bounds.min.x, node.bounds.min.y, node.bounds.max.x, node.bounds.max.y};
    j["depth"] = node.depth;
    if (node.is_leaf()) {
      j["occupants"] = node.occupants;
    } else {
      j["children"] = nlohmann::json::array();
      for (NodeId c = node.first_child; c < node.first_child + 4; ++c) {
        j["children"].push_back(dump_json_rec(c));
      }
    }
    return j;
  }

  std::size_t capacity_;
  std::uint32_t depth_cap_;
  std::vector<Node> nodes_;
  std::unordered_map<Id, Entry> index_;
};

}  // namespace usq
