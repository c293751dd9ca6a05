// Benchmark harness: run suites, summarize speed-ups, trace single trials.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "usq/usq.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  usq::SuiteOverrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON suite config (defaults to the built-in protocol)");
  cmd->add_option("--strategy", f.overrides.strategy, "pairwise, rq or usq");
  cmd->add_option("--env", f.overrides.env, "sparse, dense or circle");
  cmd->add_option("--robots", f.overrides.robots, "robot count for every environment");
  cmd->add_option("--seed", f.overrides.seed, "base seed");
  cmd->add_option("--output", f.overrides.output, "output path prefix");
  cmd->add_option("--set", f.overrides.assignments, "override any config key: key.path=value")->take_all();
}

int cmd_run(const CommonFlags& f, bool serial, unsigned workers) {
  const usq::SuiteConfig cfg = usq::load_suite_config(f.config, f.overrides);
  if (serial) workers = 1;
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  const auto records = usq::run_suite(cfg, workers);
  const auto paths = usq::write_suite_outputs(cfg, records);

  std::size_t failed = 0;
  for (const auto& r : records) {
    if (!r.failed()) continue;
    ++failed;
    std::fprintf(stderr, "%s %s n=%u seed=%llu: %s\n", r.metrics.strategy.c_str(), r.metrics.env.c_str(),
                 r.metrics.n_robots, static_cast<unsigned long long>(r.metrics.seed),
                 r.error.empty() ? std::string(usq::to_string(r.status)).c_str() : r.error.c_str());
  }
  std::printf("%zu trials, %zu failed\nwrote %s\nwrote %s\nwrote %s\n", records.size(), failed,
              paths.trials_csv.c_str(), paths.agg_csv.c_str(), paths.summary_json.c_str());
  return failed == 0 ? 0 : 1;
}

int cmd_speedup(const std::vector<std::string>& inputs, const std::optional<std::string>& output) {
  std::vector<usq::RunMetrics> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw usq::SchemaError(path + ": cannot read");
    auto part = usq::read_trials_csv(in, path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto table = usq::compute_speedup(rows);
  std::ofstream file;
  if (output) {
    const std::string path = *output + "_speedup.csv";
    usq::detail::ensure_parent(path);
    file.open(path);
  }
  std::ostream& out = output ? file : std::cout;
  out << usq::speedup_csv_header() << '\n';
  for (const auto& row : table) out << usq::to_csv_row(row) << '\n';
  return 0;
}

int cmd_trace(const CommonFlags& f) {
  const usq::SuiteConfig cfg = usq::load_suite_config(f.config, f.overrides);
  if (cfg.environments.size() != 1 || cfg.strategies.size() != 1) {
    throw usq::SchemaError("trace: needs exactly one environment and one strategy (use --env/--robots/--strategy)");
  }
  const usq::EnvSpec& e = cfg.environments.front();
  const usq::Environment env{e.kind, e.n_robots, cfg.base_seed, e.step_limit};
  const std::string path = cfg.output + "_trace.jsonl";
  usq::detail::ensure_parent(path);
  std::ofstream out(path);
  const auto result = usq::write_trace(usq::make_setup(env, cfg.params), cfg.strategies.front(), cfg.params, out);
  std::printf("%llu steps (%s)\nwrote %s\n", static_cast<unsigned long long>(result.metrics.timesteps),
              std::string(usq::to_string(result.status)).c_str(), path.c_str());
  return result.status == usq::TrialStatus::Completed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broad-phase collision detection benchmark"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  bool serial = false;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run every environment x strategy x trial cell");
  add_common(run, run_flags);
  run->add_option("--trials", run_flags.overrides.trials, "trials per randomized cell");
  run->add_flag("--serial", serial, "run trials one at a time (for timing)");
  run->add_option("--workers", workers, "worker threads (0 = one per core)");

  std::vector<std::string> inputs;
  std::optional<std::string> speedup_out;
  auto* speedup = app.add_subcommand("speedup", "T_c(rq) / T_c(usq) per cell from trial CSVs");
  speedup->add_option("files", inputs, "per-trial CSV files")->required()->check(CLI::ExistingFile);
  speedup->add_option("--output", speedup_out, "write <prefix>_speedup.csv instead of stdout");

  CommonFlags trace_flags;
  auto* trace = app.add_subcommand("trace", "per-step JSON-lines log of one trial");
  add_common(trace, trace_flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_flags, serial, workers);
    if (*speedup) return cmd_speedup(inputs, speedup_out);
    if (*trace) return cmd_trace(trace_flags);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
