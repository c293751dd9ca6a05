// Steps a small sparse fleet under each strategy and prints the counters.
#include <cstdio>

#include "usq/usq.hpp"

int main() {
  usq::TrialParams params;
  const usq::Environment env{usq::EnvKind::Sparse, 20, 7};
  const usq::TrialSetup setup = usq::make_setup(env, params);

  std::printf("%s\n", usq::csv_header().c_str());
  for (auto kind : {usq::StrategyKind::Pairwise, usq::StrategyKind::Rq, usq::StrategyKind::Usq}) {
    const usq::TrialResult result = usq::run_trial(setup, kind, params);
    std::printf("%s\n", usq::to_csv_row(result.metrics).c_str());
  }

  // The tree on its own.
  usq::QuadTree<> tree(usq::Rect::world({0, 0}, {10, 10}), 2);
  tree.insert(0, {1, 1});
  tree.insert(1, {8, 8});
  tree.insert(2, {8, 2});
  std::printf("%s", tree.dump_text().c_str());
  for (auto id : tree.query_region(usq::Rect({5, 0}, {10, 10}))) std::printf("east half: %u\n", id);
}
