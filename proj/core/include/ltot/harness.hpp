#pragma once

// Experiment orchestration: config -> environment/policy construction, the
// policy x n0 x seed grid, metrics, cost-law fitting, and artifact output
// (JSON-lines events, summary CSV, metrics JSON).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ltot/config.hpp"
#include "ltot/environment.hpp"
#include "ltot/eventlog.hpp"
#include "ltot/lrsc.hpp"

namespace ltot::harness {

struct CostFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 1.0;
  std::vector<std::pair<double, double>> points;  // (n0, expansions)
};

// OLS of expansions against a * n0*log_eta(n0) + b. Throws with < 3 points.
CostFit fit_cost_curve(const std::vector<std::pair<double, double>>& points,
                       double eta);

struct RungCostStats {
  double mean = 0.0;
  double cv = 0.0;
};

// Mean and coefficient of variation of per-rung lateral spend. Throws with
// fewer than 2 rungs.
RungCostStats rung_cost_stats(std::span<const std::uint64_t> rung_spend);
RungCostStats rung_cost_stats(const EventLog& log);

struct CellResult {
  std::string policy;
  std::string env;
  std::int64_t n0 = 0;
  std::uint64_t seed = 0;
  bool solved = false;
  std::uint64_t total_expansions = 0;
  std::optional<std::uint64_t> time_to_first_hit;
  int rungs_executed = 0;
  std::uint64_t lateral_expansions = 0;
  std::optional<RungCostStats> rung_stats;
  int proposed_promotions = 0;
  int false_promotions = 0;
  int promotions = 0;
  std::string outcome;
  std::string events;  // serialized JSON-lines
};

struct MetricsSummary {
  double success_rate = 0.0;
  double false_promotion_rate = 0.0;   // failing / proposed (0 when none)
  double promotion_selectivity = 0.0;  // accepted / proposed (1 when none)
  std::optional<double> time_to_first_hit;  // median over solved runs
  std::optional<double> rung_cost_cv;       // mean over cells with >= 2 rungs
  double rung_count_mean = 0.0;
  double rung_count_sd = 0.0;
  int cells = 0;

  std::string to_json() const;
};

// Builds the environment named by `env` for one cell.
std::unique_ptr<Environment> make_environment(const Config& cfg, std::int64_t n0,
                                              std::uint64_t seed);

// Race parameters shared by the race-backed policies.
lrsc::RaceParams race_params_from_config(const Config& cfg, std::uint64_t seed);

// Runs one grid cell. Policies: ltot, lrsc, beam_tot, sh_only, sh_mainline.
CellResult run_cell(const Config& cfg, std::int64_t n0, std::uint64_t seed);

struct ExperimentResult {
  std::vector<CellResult> cells;  // canonical (policy, env, n0, seed) order
  MetricsSummary summary;
  std::string summary_csv;
};

// Executes the full grid; deterministic output for identical config + seeds.
// With out_dir set, writes events per cell, summary.csv, and metrics.json.
ExperimentResult run_experiment(const Config& cfg);

// Seeds for the run: `seeds` as a list, or seed..seed+seeds-1 when `seeds` is
// a single count, or just `seed`.
std::vector<std::uint64_t> seeds_from_config(const Config& cfg);

std::string summary_csv_header();
std::string cell_csv_row(const CellResult& cell);

}  // namespace ltot::harness
