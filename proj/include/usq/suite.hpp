#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "usq/metrics.hpp"
#include "usq/sim.hpp"
#include "usq/strategies.hpp"
#include "usq/trial.hpp"

namespace usq {

/// Configuration problem; the message names the offending field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvSpec {
  EnvKind kind = EnvKind::Sparse;
  std::uint32_t n_robots = 20;
  std::uint64_t step_limit = 5000;

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

struct SuiteConfig {
  std::vector<EnvSpec> environments;
  std::vector<StrategyKind> strategies;
  std::uint32_t trials_per_case = 10;
  std::uint64_t base_seed = 0;
  TrialParams params;
  std::string output = "usq";
};

/// The evaluation protocol: three environments at 5, 20 and 50 robots,
/// every strategy, ten randomized trials per case.
[[nodiscard]] inline nlohmann::json default_suite_json() {
  nlohmann::json envs = nlohmann::json::array();
  for (const char* name : {"sparse", "dense", "circle"}) {
    for (int n : {5, 20, 50}) envs.push_back({{"name", name}, {"n_robots", n}, {"step_limit", 5000}});
  }
  return {
      {"environments", envs},
      {"strategies", {"pairwise", "rq", "usq"}},
      {"trials_per_case", 10},
      {"base_seed", 0},
      {"safety", {{"r", 0.5}, {"epsilon", 0.05}}},
      {"v_max", 2.0},
      {"dt", 0.1},
      {"max_turn_rate", std::numbers::pi},
      {"goal_tolerance", 0.1},
      {"capacity", 2},
      {"depth_cap", 16},
      {"output", "usq"},
  };
}

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(path + ": wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError(where + key + ": unknown field");
    }
  }
}

inline double positive(const nlohmann::json& j, const std::string& path, bool allow_zero = false) {
  const auto v = field<double>(j, path);
  if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
    throw SchemaError(path + ": must be " + (allow_zero ? ">= 0" : "> 0"));
  }
  return v;
}

}  // namespace detail

[[nodiscard]] inline SuiteConfig parse_suite_config(const nlohmann::json& j) {
  using detail::field;
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  detail::reject_unknown(j, "",
                         {"environments", "strategies", "trials_per_case", "base_seed", "safety", "v_max", "dt",
                          "max_turn_rate", "goal_tolerance", "capacity", "depth_cap", "output"});
  const nlohmann::json defaults = default_suite_json();
  auto get = [&](const char* key) -> const nlohmann::json& { return j.contains(key) ? j.at(key) : defaults.at(key); };

  SuiteConfig cfg;
  const auto& envs = get("environments");
  if (!envs.is_array() || envs.empty()) throw SchemaError("environments: expected a non-empty array");
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const std::string where = "environments[" + std::to_string(i) + "].";
    const auto& e = envs[i];
    if (!e.is_object()) throw SchemaError("environments[" + std::to_string(i) + "]: expected an object");
    detail::reject_unknown(e, where, {"name", "n_robots", "step_limit"});
    if (!e.contains("name")) throw SchemaError(where + "name: missing");
    const auto name = field<std::string>(e.at("name"), where + "name");
    const auto kind = parse_env_kind(name);
    if (!kind) throw SchemaError(where + "name: unknown environment '" + name + "'");
    EnvSpec spec{*kind, 20, 5000};
    if (e.contains("n_robots")) spec.n_robots = field<std::uint32_t>(e.at("n_robots"), where + "n_robots");
    if (e.contains("step_limit")) spec.step_limit = field<std::uint64_t>(e.at("step_limit"), where + "step_limit");
    if (spec.n_robots < 1) throw SchemaError(where + "n_robots: must be >= 1");
    if (spec.step_limit < 1) throw SchemaError(where + "step_limit: must be >= 1");
    cfg.environments.push_back(spec);
  }

  const auto& strategies = get("strategies");
  if (!strategies.is_array() || strategies.empty()) throw SchemaError("strategies: expected a non-empty array");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const std::string where = "strategies[" + std::to_string(i) + "]";
    const auto name = field<std::string>(strategies[i], where);
    const auto kind = parse_strategy(name);
    if (!kind) throw SchemaError(where + ": unknown strategy '" + name + "'");
    cfg.strategies.push_back(*kind);
  }

  cfg.trials_per_case = field<std::uint32_t>(get("trials_per_case"), "trials_per_case");
  if (cfg.trials_per_case < 1) throw SchemaError("trials_per_case: must be >= 1");
  cfg.base_seed = field<std::uint64_t>(get("base_seed"), "base_seed");

  const auto& safety = get("safety");
  if (!safety.is_object()) throw SchemaError("safety: expected an object");
  detail::reject_unknown(safety, "safety.", {"r", "epsilon"});
  cfg.params.radius = safety.contains("r") ? detail::positive(safety.at("r"), "safety.r") : 0.5;
  cfg.params.epsilon =
      safety.contains("epsilon") ? detail::positive(safety.at("epsilon"), "safety.epsilon", true) : 0.05;
  cfg.params.kin.v_max = detail::positive(get("v_max"), "v_max", true);
  cfg.params.kin.dt = detail::positive(get("dt"), "dt");
  cfg.params.kin.max_turn_rate = detail::positive(get("max_turn_rate"), "max_turn_rate", true);
  cfg.params.kin.goal_tolerance = detail::positive(get("goal_tolerance"), "goal_tolerance");
  cfg.params.capacity = field<std::size_t>(get("capacity"), "capacity");
  if (cfg.params.capacity < 1) throw SchemaError("capacity: must be >= 1");
  cfg.params.depth_cap = field<std::uint32_t>(get("depth_cap"), "depth_cap");
  if (cfg.params.depth_cap < 1) throw SchemaError("depth_cap: must be >= 1");
  cfg.output = field<std::string>(get("output"), "output");
  return cfg;
}

/// Command-line overrides, applied to the raw JSON before validation.
struct SuiteOverrides {
  std::optional<std::string> strategy;
  std::optional<std::string> env;
  std::optional<std::uint32_t> robots;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
  std::optional<std::string> output;
  std::vector<std::string> assignments;  // "dotted.key=json-value"
};

inline void apply_assignment(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw SchemaError("--set " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // bare words are strings
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw SchemaError("--set " + key + ": empty key segment");
    nlohmann::json* child = nullptr;
    if (node->is_array()) {
      // Numeric segments index into arrays: environments.0.n_robots=5
      if (part.find_first_not_of("0123456789") != std::string::npos || std::stoul(part) >= node->size()) {
        throw SchemaError("--set " + key + ": '" + part + "' is not an index into the array");
      }
      child = &(*node)[std::stoul(part)];
    } else if (node->is_object() || node->is_null()) {
      child = &(*node)[part];
    } else {
      throw SchemaError("--set " + key + ": '" + part + "' is inside a non-object value");
    }
    if (dot == std::string::npos) {
      *child = value;
      return;
    }
    node = child;
    start = dot + 1;
  }
}

inline void apply_overrides(nlohmann::json& j, const SuiteOverrides& o) {
  if (!j.contains("environments")) j["environments"] = default_suite_json()["environments"];
  if (o.strategy) j["strategies"] = nlohmann::json::array({*o.strategy});
  if (o.seed) j["base_seed"] = *o.seed;
  if (o.trials) j["trials_per_case"] = *o.trials;
  if (o.output) j["output"] = *o.output;
  auto& envs = j["environments"];
  if (o.env) {
    nlohmann::json kept = nlohmann::json::array();
    for (const auto& e : envs) {
      if (e.is_object() && e.value("name", "") == *o.env) kept.push_back(e);
    }
    if (kept.empty()) kept.push_back({{"name", *o.env}, {"n_robots", o.robots.value_or(20)}});
    envs = kept;
  }
  if (o.robots) {
    nlohmann::json unique = nlohmann::json::array();
    for (auto e : envs) {
      if (e.is_object()) e["n_robots"] = *o.robots;
      if (std::find(unique.begin(), unique.end(), e) == unique.end()) unique.push_back(e);
    }
    envs = unique;
  }
  // Last, so indices refer to the environment list that will actually run.
  for (const auto& a : o.assignments) apply_assignment(j, a);
}

[[nodiscard]] inline SuiteConfig load_suite_config(const std::optional<std::string>& path, const SuiteOverrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw SchemaError("config: cannot read '" + *path + "'");
    j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("config: '" + *path + "' is not valid JSON");
  }
  apply_overrides(j, o);
  return parse_suite_config(j);
}

/// One (environment, strategy, trial) run of a suite.
struct TrialCell {
  EnvSpec env;
  StrategyKind strategy;
  std::uint64_t seed;
};

/// Cells in output order. Circle layouts do not depend on the seed, so that
/// environment runs once per strategy.
[[nodiscard]] inline std::vector<TrialCell> expand_cells(const SuiteConfig& cfg) {
  std::vector<TrialCell> cells;
  for (const EnvSpec& env : cfg.environments) {
    const std::uint32_t trials = env.kind == EnvKind::Circle ? 1 : cfg.trials_per_case;
    for (StrategyKind s : cfg.strategies) {
      for (std::uint32_t t = 0; t < trials; ++t) cells.push_back({env, s, cfg.base_seed + t});
    }
  }
  return cells;
}

struct TrialRecord {
  RunMetrics metrics;
  TrialStatus status = TrialStatus::Completed;
  std::string error;  // empty unless the trial threw

  [[nodiscard]] bool failed() const noexcept { return !error.empty() || status != TrialStatus::Completed; }
};

[[nodiscard]] inline TrialRecord run_cell(const TrialCell& cell, const TrialParams& params) {
  TrialRecord rec;
  rec.metrics.strategy = std::string(to_string(cell.strategy));
  rec.metrics.env = std::string(to_string(cell.env.kind));
  rec.metrics.n_robots = cell.env.n_robots;
  rec.metrics.seed = cell.seed;
  try {
    const Environment env{cell.env.kind, cell.env.n_robots, cell.seed, cell.env.step_limit};
    TrialResult result = run_trial(make_setup(env, params), cell.strategy, params);
    rec.metrics = std::move(result.metrics);
    rec.status = result.status;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Runs every cell. With `workers` > 1 cells are spread over threads; each
/// trial still runs on a single thread and results keep cell order.
[[nodiscard]] inline std::vector<TrialRecord> run_suite(const SuiteConfig& cfg, unsigned workers = 1) {
  const auto cells = expand_cells(cfg);
  std::vector<TrialRecord> records(cells.size());
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) records[i] = run_cell(cells[i], cfg.params);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) records[i] = run_cell(cells[i], cfg.params);
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

[[nodiscard]] inline Stat summarize(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct CellAggregate {
  std::string strategy;
  std::string env;
  std::uint32_t n_robots = 0;
  std::size_t trials = 0;
  Stat timesteps, T_q, T_n, T_c, N_c, N_d, N_m;
};

[[nodiscard]] inline std::vector<CellAggregate> aggregate(const std::vector<RunMetrics>& rows) {
  std::vector<CellAggregate> out;
  std::vector<std::vector<const RunMetrics*>> groups;
  for (const RunMetrics& m : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const CellAggregate& c) {
      return c.strategy == m.strategy && c.env == m.env && c.n_robots == m.n_robots;
    });
    if (it == out.end()) {
      out.push_back({m.strategy, m.env, m.n_robots, 0, {}, {}, {}, {}, {}, {}, {}});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&m);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    auto column = [&](auto get) {
      std::vector<double> v;
      for (const RunMetrics* m : groups[g]) v.push_back(static_cast<double>(get(*m)));
      return summarize(v);
    };
    CellAggregate& c = out[g];
    c.trials = groups[g].size();
    c.timesteps = column([](const RunMetrics& m) { return m.timesteps; });
    c.T_q = column([](const RunMetrics& m) { return m.T_q; });
    c.T_n = column([](const RunMetrics& m) { return m.T_n; });
    c.T_c = column([](const RunMetrics& m) { return m.T_c; });
    c.N_c = column([](const RunMetrics& m) { return m.N_c; });
    c.N_d = column([](const RunMetrics& m) { return m.N_d; });
    c.N_m = column([](const RunMetrics& m) { return m.N_m; });
  }
  return out;
}

[[nodiscard]] inline std::string aggregate_csv_header() {
  return "strategy,env,n_robots,trials,timesteps_mean,timesteps_std,T_q_mean,T_q_std,T_n_mean,T_n_std,"
         "T_c_mean,T_c_std,N_c_mean,N_c_std,N_d_mean,N_d_std,N_m_mean,N_m_std";
}

[[nodiscard]] inline std::string to_csv_row(const CellAggregate& c) {
  std::string out = c.strategy + ',' + c.env + ',' + std::to_string(c.n_robots) + ',' + std::to_string(c.trials);
  for (const Stat* s : {&c.timesteps, &c.T_q, &c.T_n, &c.T_c, &c.N_c, &c.N_d, &c.N_m}) {
    out += ',' + format_seconds(s->mean) + ',' + format_seconds(s->stddev);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

}  // namespace detail

/// Reads a per-trial CSV written by write_suite_outputs.
[[nodiscard]] inline std::vector<RunMetrics> read_trials_csv(std::istream& in, const std::string& name = "trials csv") {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw SchemaError(name + ": header must be '" + csv_header() + "'");
  }
  std::vector<RunMetrics> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != kMetricsColumns.size()) {
      throw SchemaError(name + ":" + std::to_string(lineno) + ": expected 11 columns");
    }
    try {
      RunMetrics m;
      m.strategy = cells[0];
      m.env = cells[1];
      m.n_robots = static_cast<std::uint32_t>(std::stoul(cells[2]));
      m.seed = std::stoull(cells[3]);
      m.timesteps = std::stoull(cells[4]);
      m.T_q = std::stod(cells[5]);
      m.T_n = std::stod(cells[6]);
      m.T_c = std::stod(cells[7]);
      m.N_c = std::stoull(cells[8]);
      m.N_d = std::stoull(cells[9]);
      m.N_m = std::stoull(cells[10]);
      rows.push_back(std::move(m));
    } catch (const std::logic_error&) {
      throw SchemaError(name + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

struct SuiteOutputs {
  std::filesystem::path trials_csv;
  std::filesystem::path agg_csv;
  std::filesystem::path summary_json;
};

inline SuiteOutputs write_suite_outputs(const SuiteConfig& cfg, const std::vector<TrialRecord>& records) {
  const SuiteOutputs paths{cfg.output + "_trials.csv", cfg.output + "_agg.csv", cfg.output + "_summary.json"};
  detail::ensure_parent(paths.trials_csv);

  std::vector<RunMetrics> rows;
  for (const auto& r : records) rows.push_back(r.metrics);
  {
    std::ofstream out(paths.trials_csv);
    out << csv_header() << '\n';
    for (const auto& m : rows) out << to_csv_row(m) << '\n';
  }
  const auto cells = aggregate(rows);
  {
    std::ofstream out(paths.agg_csv);
    out << aggregate_csv_header() << '\n';
    for (const auto& c : cells) out << to_csv_row(c) << '\n';
  }

  nlohmann::ordered_json summary;
  summary["trials"] = nlohmann::ordered_json::array();
  std::size_t failed = 0;
  for (const auto& r : records) {
    auto j = to_json(r.metrics);
    j["status"] = r.error.empty() ? std::string(to_string(r.status)) : "error";
    if (!r.error.empty()) j["error"] = r.error;
    failed += r.failed() ? 1 : 0;
    summary["trials"].push_back(j);
  }
  summary["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json j;
    j["strategy"] = c.strategy;
    j["env"] = c.env;
    j["n_robots"] = c.n_robots;
    j["trials"] = c.trials;
    for (auto [name, s] : {std::pair{"timesteps", &c.timesteps}, {"T_q", &c.T_q}, {"T_n", &c.T_n},
                           {"T_c", &c.T_c}, {"N_c", &c.N_c}, {"N_d", &c.N_d}, {"N_m", &c.N_m}}) {
      j[name] = {{"mean", s->mean}, {"std", s->stddev}};
    }
    summary["cells"].push_back(j);
  }
  summary["failed_trials"] = failed;
  std::ofstream(paths.summary_json) << summary.dump(2) << '\n';
  return paths;
}

struct SpeedupRow {
  std::string env;
  std::uint32_t n_robots = 0;
  std::size_t trials = 0;
  double rq_T_c_mean = 0.0;
  double usq_T_c_mean = 0.0;
  double speedup = 0.0;      // mean T_c(rq) / mean T_c(usq)
  double speedup_std = 0.0;  // spread of per-seed ratios
};

/// Speed-up of USQ over RQ per (env, n_robots) cell. Cells with rows for
/// only one of the two strategies are an error.
[[nodiscard]] inline std::vector<SpeedupRow> compute_speedup(const std::vector<RunMetrics>& rows) {
  struct Cell {
    std::map<std::uint64_t, double> rq, usq;
  };
  std::vector<std::pair<std::string, std::uint32_t>> order;
  std::map<std::pair<std::string, std::uint32_t>, Cell> cells;
  for (const RunMetrics& m : rows) {
    if (m.strategy != "rq" && m.strategy != "usq") continue;
    const auto key = std::pair{m.env, m.n_robots};
    if (!cells.count(key)) order.push_back(key);
    (m.strategy == "rq" ? cells[key].rq : cells[key].usq)[m.seed] = m.T_c;
  }
  if (order.empty()) throw SchemaError("speedup: no rq or usq rows found");

  std::vector<SpeedupRow> out;
  for (const auto& key : order) {
    const Cell& c = cells.at(key);
    const std::string label = key.first + "/" + std::to_string(key.second);
    if (c.rq.empty()) throw SchemaError("speedup: cell " + label + " has usq rows but no rq rows");
    if (c.usq.empty()) throw SchemaError("speedup: cell " + label + " has rq rows but no usq rows");
    std::vector<double> rq, usq, ratios;
    for (const auto& [seed, t] : c.rq) rq.push_back(t);
    for (const auto& [seed, t] : c.usq) usq.push_back(t);
    for (const auto& [seed, t] : c.rq) {
      if (auto it = c.usq.find(seed); it != c.usq.end() && it->second > 0.0) ratios.push_back(t / it->second);
    }
    SpeedupRow row;
    row.env = key.first;
    row.n_robots = key.second;
    row.trials = std::min(rq.size(), usq.size());
    row.rq_T_c_mean = summarize(rq).mean;
    row.usq_T_c_mean = summarize(usq).mean;
    row.speedup = row.usq_T_c_mean > 0.0 ? row.rq_T_c_mean / row.usq_T_c_mean : 0.0;
    row.speedup_std = summarize(ratios).stddev;
    out.push_back(row);
  }
  return out;
}

[[nodiscard]] inline std::string speedup_csv_header() {
  return "env,n_robots,trials,T_c_rq_mean,T_c_usq_mean,speedup,speedup_std";
}

[[nodiscard]] inline std::string to_csv_row(const SpeedupRow& r) {
  return r.env + ',' + std::to_string(r.n_robots) + ',' + std::to_string(r.trials) + ',' +
         format_seconds(r.rq_T_c_mean) + ',' + format_seconds(r.usq_T_c_mean) + ',' + format_seconds(r.speedup) +
         ',' + format_seconds(r.speedup_std);
}

/// Runs one trial and writes one JSON object per step to `out`.
inline TrialResult write_trace(const TrialSetup& setup, StrategyKind kind, const TrialParams& params,
                               std::ostream& out) {
  return run_trial(setup, kind, params, [&](const StepTrace& s) {
    nlohmann::json j;
    j["step"] = s.timestep;
    auto& positions = j["positions"] = nlohmann::json::array();
    auto& skips = j["skip"] = nlohmann::json::array();
    for (const Robot& r : s.robots) {
      positions.push_back({r.pos.x, r.pos.y});
      skips.push_back(r.skip.num_skip);
    }
    j["node_count"] = s.node_count;
    j["checks"] = s.stats.checks;
    j["tree_updates"] = s.stats.tree_updates;
    auto& reports = j["reports"] = nlohmann::json::array();
    for (const CollisionReport& r : s.reports) reports.push_back({r.pair.a, r.pair.b});
    out << j.dump() << '\n';
  });
}

}  // namespace usq
