#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "usq/metrics.hpp"
#include "usq/sim.hpp"
#include "usq/strategies.hpp"

namespace usq {

/// Physical and index parameters shared by every strategy in a trial.
struct TrialParams {
  double radius = 0.5;
  double epsilon = 0.05;
  KinematicParams kin;
  std::size_t capacity = 2;
  std::uint32_t depth_cap = 16;

  [[nodiscard]] SafetyParams safety() const { return SafetyParams(radius, kin.max_dist_traveled(), epsilon); }
};

/// A concrete world and robot fleet, either generated or hand-built.
struct TrialSetup {
  std::string env_name;
  Rect world;
  std::vector<Robot> robots;
  std::uint64_t seed = 0;
  std::uint64_t step_limit = 5000;
};

[[nodiscard]] inline TrialSetup make_setup(const Environment& env, const TrialParams& params) {
  return {std::string(to_string(env.kind)), env.world(), gen_environment(env, params.radius, params.kin),
          env.seed, env.step_limit};
}

enum class TrialStatus { Completed, StepLimit };

[[nodiscard]] inline std::string_view to_string(TrialStatus s) noexcept {
  return s == TrialStatus::Completed ? "completed" : "step_limit";
}

struct TrialResult {
  RunMetrics metrics;
  TrialStatus status = TrialStatus::Completed;
  std::vector<CollisionReport> reports;
  std::vector<CollisionEpisode> episodes;
};

/// What a trace consumer sees after each step.
struct StepTrace {
  std::int64_t timestep = 0;
  std::span<const Robot> robots;
  std::size_t node_count = 0;
  StepStats stats;
  std::span<const CollisionReport> reports;
};

using TraceHook = std::function<void(const StepTrace&)>;

/// Steps the fleet until every robot is at its goal or the step limit is
/// hit, running `kind` each step and an untimed all-pairs oracle alongside
/// it to score detections per collision episode.
[[nodiscard]] inline TrialResult run_trial(const TrialSetup& setup, StrategyKind kind, const TrialParams& params,
                                           const TraceHook& trace = {}) {
  params.kin.validate();
  const SafetyParams safety = params.safety();
  std::vector<Robot> robots = setup.robots;
  for (const Robot& r : robots) {
    if (!setup.world.contains(r.pos) || !setup.world.contains(r.goal)) {
      throw std::invalid_argument("run_trial: robot start or goal outside the world");
    }
  }

  auto strategy = make_strategy(kind, {setup.world, safety, params.capacity, params.depth_cap});
  PhaseTimers timers;
  strategy->init(robots, timers);

  TrialResult result;
  EpisodeTracker tracker;
  std::uint64_t checks = 0;
  std::int64_t t = 0;
  const double tol = params.kin.goal_tolerance;
  while (!all_reached(robots, tol) && static_cast<std::uint64_t>(t) < setup.step_limit) {
    ++t;
    for (Robot& r : robots) controller_step(r, params.kin);
    const std::size_t from = result.reports.size();
    const StepStats stats = strategy->step(robots, t, timers, result.reports);
    checks += stats.checks;
    tracker.observe(t, oracle_sweep(robots, safety.r));
    if (trace) {
      trace({t, robots, strategy->node_count(), stats,
             std::span<const CollisionReport>(result.reports).subspan(from)});
    }
  }

  result.status = all_reached(robots, tol) ? TrialStatus::Completed : TrialStatus::StepLimit;
  result.episodes = tracker.finish();
  const DetectionScore score = score_detection(result.episodes, result.reports);

  RunMetrics& m = result.metrics;
  m.strategy = std::string(to_string(kind));
  m.env = setup.env_name;
  m.n_robots = static_cast<std::uint32_t>(robots.size());
  m.seed = setup.seed;
  m.timesteps = static_cast<std::uint64_t>(t);
  m.T_q = timers.seconds(Phase::Tree);
  m.T_n = timers.seconds(Phase::Neighbor);
  m.T_c = timers.seconds(Phase::Collision);
  m.N_c = checks;
  m.N_d = score.detected;
  m.N_m = score.missed;
  return result;
}

}  // namespace usq
