#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "usq/quadtree.hpp"
#include "usq/sim.hpp"
#include "usq/skipping.hpp"

namespace usq {

/// Unordered robot pair, stored with a < b.
struct RobotPair {
  RobotId a = 0;
  RobotId b = 0;

  RobotPair() = default;
  RobotPair(RobotId u, RobotId v) : a(std::min(u, v)), b(std::max(u, v)) {}

  [[nodiscard]] std::uint64_t key() const noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }
  friend auto operator<=>(const RobotPair&, const RobotPair&) = default;
};

struct CollisionReport {
  std::int64_t timestep = 0;
  RobotPair pair;
  std::array<Vec2, 2> positions{};  // of pair.a, pair.b

  friend bool operator==(const CollisionReport&, const CollisionReport&) = default;
};

struct CollisionEpisode {
  RobotPair pair;
  std::int64_t start_step = 0;
  std::int64_t end_step = 0;

  friend bool operator==(const CollisionEpisode&, const CollisionEpisode&) = default;
};

/// Counters and timers for one trial. Timers are in seconds.
struct RunMetrics {
  std::string strategy;
  std::string env;
  std::uint32_t n_robots = 0;
  std::uint64_t seed = 0;
  std::uint64_t timesteps = 0;
  double T_q = 0.0;
  double T_n = 0.0;
  double T_c = 0.0;
  std::uint64_t N_c = 0;
  std::uint64_t N_d = 0;
  std::uint64_t N_m = 0;
};

inline constexpr std::array<const char*, 11> kMetricsColumns{
    "strategy", "env", "n_robots", "seed", "timesteps", "T_q", "T_n", "T_c", "N_c", "N_d", "N_m"};

[[nodiscard]] inline bool is_timer_column(std::string_view c) noexcept {
  return c == "T_q" || c == "T_n" || c == "T_c";
}

[[nodiscard]] inline std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kMetricsColumns.size(); ++i) {
    if (i) out += ',';
    out += kMetricsColumns[i];
  }
  return out;
}

[[nodiscard]] inline std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

[[nodiscard]] inline std::string to_csv_row(const RunMetrics& m) {
  std::string out;
  out += m.strategy + ',' + m.env + ',' + std::to_string(m.n_robots) + ',' + std::to_string(m.seed) +
         ',' + std::to_string(m.timesteps) + ',';
  out += format_seconds(m.T_q) + ',' + format_seconds(m.T_n) + ',' + format_seconds(m.T_c) + ',';
  out += std::to_string(m.N_c) + ',' + std::to_string(m.N_d) + ',' + std::to_string(m.N_m);
  return out;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["strategy"] = m.strategy;
  j["env"] = m.env;
  j["n_robots"] = m.n_robots;
  j["seed"] = m.seed;
  j["timesteps"] = m.timesteps;
  j["T_q"] = m.T_q;
  j["T_n"] = m.T_n;
  j["T_c"] = m.T_c;
  j["N_c"] = m.N_c;
  j["N_d"] = m.N_d;
  j["N_m"] = m.N_m;
  return j;
}

enum class Phase { Collision = 0, Tree = 1, Neighbor = 2 };

/// Accumulating wall-clock timers for T_c, T_q and T_n. Tree and neighbor
/// phases may only be open inside an open collision phase, and no phase may
/// be opened twice.
class PhaseTimers {
 public:
  using Clock = std::chrono::steady_clock;

  void open(Phase p) {
    const auto i = static_cast<std::size_t>(p);
    if (open_[i]) throw std::logic_error("PhaseTimers: phase opened twice");
    if (p != Phase::Collision && !open_[0]) {
      throw std::logic_error("PhaseTimers: inner phase opened outside the collision phase");
    }
    open_[i] = true;
    started_[i] = Clock::now();
  }

  void close(Phase p) {
    const auto now = Clock::now();
    const auto i = static_cast<std::size_t>(p);
    if (!open_[i]) throw std::logic_error("PhaseTimers: closing a phase that is not open");
    if (p == Phase::Collision && (open_[1] || open_[2])) {
      throw std::logic_error("PhaseTimers: collision phase closed while an inner phase is open");
    }
    open_[i] = false;
    total_[i] += now - started_[i];
  }

  [[nodiscard]] bool is_open(Phase p) const noexcept { return open_[static_cast<std::size_t>(p)]; }

  [[nodiscard]] double seconds(Phase p) const noexcept {
    return std::chrono::duration<double>(total_[static_cast<std::size_t>(p)]).count();
  }

 private:
  std::array<bool, 3> open_{};
  std::array<Clock::time_point, 3> started_{};
  std::array<Clock::duration, 3> total_{};
};

/// RAII phase scope.
class ScopedPhase {
 public:
  ScopedPhase(PhaseTimers& timers, Phase phase) : timers_(timers), phase_(phase) { timers_.open(phase_); }
  ~ScopedPhase() {
    if (timers_.is_open(phase_)) timers_.close(phase_);
  }
  ScopedPhase(const ScopedPhase&) = delete;
  ScopedPhase& operator=(const ScopedPhase&) = delete;

 private:
  PhaseTimers& timers_;
  Phase phase_;
};

/// Exhaustive all-pairs overlap test: the ground truth every strategy is
/// scored against. Pairs come out sorted.
[[nodiscard]] inline std::vector<RobotPair> oracle_sweep(std::span<const Robot> robots, double r) {
  std::vector<RobotPair> out;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      if (collision_predicate(robots[i].pos, robots[j].pos, r)) out.emplace_back(robots[i].id, robots[j].id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Builds maximal runs of consecutive colliding timesteps per pair from a
/// stream of per-step oracle sets. Steps must be observed in increasing
/// order.
class EpisodeTracker {
 public:
  void observe(std::int64_t timestep, std::span<const RobotPair> pairs) {
    if (has_last_ && timestep <= last_) throw std::logic_error("EpisodeTracker: timesteps must increase");
    for (const RobotPair& p : pairs) {
      auto it = open_.find(p.key());
      if (it != open_.end() && it->second.end_step == timestep - 1) {
        it->second.end_step = timestep;
        continue;
      }
      if (it != open_.end()) {
        closed_.push_back(it->second);
        it->second = {p, timestep, timestep};
      } else {
        open_.emplace(p.key(), CollisionEpisode{p, timestep, timestep});
      }
    }
    // Anything not extended this step has ended.
    for (auto it = open_.begin(); it != open_.end();) {
      if (it->second.end_step != timestep) {
        closed_.push_back(it->second);
        it = open_.erase(it);
      } else {
        ++it;
      }
    }
    last_ = timestep;
    has_last_ = true;
  }

  [[nodiscard]] std::vector<CollisionEpisode> finish() const {
    std::vector<CollisionEpisode> out = closed_;
    for (const auto& [key, ep] : open_) out.push_back(ep);
    std::sort(out.begin(), out.end(), [](const CollisionEpisode& x, const CollisionEpisode& y) {
      return std::tie(x.start_step, x.pair) < std::tie(y.start_step, y.pair);
    });
    return out;
  }

 private:
  std::map<std::uint64_t, CollisionEpisode> open_;
  std::vector<CollisionEpisode> closed_;
  std::int64_t last_ = 0;
  bool has_last_ = false;
};

struct StepPairs {
  std::int64_t timestep = 0;
  std::vector<RobotPair> pairs;
};

[[nodiscard]] inline std::vector<CollisionEpisode> assemble_episodes(std::span<const StepPairs> history) {
  EpisodeTracker tracker;
  for (const StepPairs& s : history) tracker.observe(s.timestep, s.pairs);
  return tracker.finish();
}

struct DetectionScore {
  std::uint64_t detected = 0;
  std::uint64_t missed = 0;
};

/// An episode counts as detected when the strategy reported its pair at
/// least once inside the episode's interval.
[[nodiscard]] inline DetectionScore score_detection(std::span<const CollisionEpisode> episodes,
                                                    std::span<const CollisionReport> reports) {
  std::map<std::uint64_t, std::vector<std::int64_t>> seen;
  for (const CollisionReport& r : reports) seen[r.pair.key()].push_back(r.timestep);
  for (auto& [k, steps] : seen) std::sort(steps.begin(), steps.end());

  DetectionScore score;
  for (const CollisionEpisode& ep : episodes) {
    bool hit = false;
    if (auto it = seen.find(ep.pair.key()); it != seen.end()) {
      auto lo = std::lower_bound(it->second.begin(), it->second.end(), ep.start_step);
      hit = lo != it->second.end() && *lo <= ep.end_step;
    }
    ++(hit ? score.detected : score.missed);
  }
  return score;
}

}  // namespace usq
