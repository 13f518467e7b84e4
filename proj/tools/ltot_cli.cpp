// Command-line front end: run a configured experiment grid, sweep lateral
// widths, fit the cost law from saved summaries, or print the per-horizon
// envelope trace of a single branch.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltot/config.hpp"
#include "ltot/environments.hpp"
#include "ltot/harness.hpp"
#include "ltot/lrsc.hpp"

namespace {

using ltot::harness::Config;

Config load_with_seed_override(const std::string& path) {
  Config cfg = Config::load(path);
  if (const char* env_seed = std::getenv("LTOT_SEED")) {
    cfg.set("seed", env_seed);
  }
  return cfg;
}

int cmd_run(const std::string& config_path) {
  const Config cfg = load_with_seed_override(config_path);
  const auto result = ltot::harness::run_experiment(cfg);
  std::cout << result.summary_csv;
  std::cout << result.summary.to_json() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& n0_csv) {
  Config cfg = load_with_seed_override(config_path);
  if (!n0_csv.empty()) cfg.set("n0", n0_csv);
  const auto result = ltot::harness::run_experiment(cfg);
  std::cout << result.summary_csv;

  // Cost fit over the sweep: mean lateral expansions per n0.
  std::vector<std::pair<double, double>> points;
  {
    std::vector<std::int64_t> n0s = cfg.int_list("n0", {});
    for (std::int64_t n0 : n0s) {
      double total = 0.0;
      int count = 0;
      for (const auto& c : result.cells) {
        if (c.n0 != n0) continue;
        total += static_cast<double>(c.lateral_expansions);
        ++count;
      }
      if (count > 0) points.emplace_back(static_cast<double>(n0), total / count);
    }
  }
  if (points.size() >= 3) {
    const auto fit = ltot::harness::fit_cost_curve(points, cfg.num("eta", 4.0));
    std::printf("cost_fit: a=%.6g b=%.6g r_squared=%.6f\n", fit.a, fit.b,
                fit.r_squared);
  }
  std::cout << result.summary.to_json() << "\n";
  return 0;
}

int cmd_fit(const std::string& events_dir, double eta) {
  // Reads every summary.csv under the directory and fits expansions against
  // a*n0*log_eta(n0) + b using the lateral-expansions column.
  std::vector<std::pair<double, double>> points;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(events_dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "summary.csv")
      continue;
    std::ifstream f(entry.path());
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("policy,", 0) == 0) continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) cols.push_back(tok);
      if (cols.size() < 9) continue;
      try {
        points.emplace_back(std::stod(cols[2]), std::stod(cols[8]));
      } catch (const std::exception&) {
        continue;
      }
    }
  }
  if (points.size() < 3) {
    std::fprintf(stderr, "fit: found %zu usable rows, need >= 3\n", points.size());
    return 1;
  }
  const auto fit = ltot::harness::fit_cost_curve(points, eta);
  std::printf("points=%zu a=%.6g b=%.6g r_squared=%.6f\n", points.size(), fit.a,
              fit.b, fit.r_squared);
  return 0;
}

int cmd_trace(const std::string& config_path) {
  const Config cfg = load_with_seed_override(config_path);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  const std::int64_t n0 = cfg.int_list("n0", {8}).front();
  auto env = ltot::harness::make_environment(cfg, n0, seed);
  auto* synth = dynamic_cast<ltot::envs::SyntheticRaceEnv*>(env.get());
  if (!synth) {
    std::fprintf(stderr, "trace: needs a synthetic race environment\n");
    return 1;
  }
  ltot::Tree tree;
  const auto root_sample = env->root();
  const ltot::NodeId root =
      tree.add_root(root_sample.payload, root_sample.v, 0.85,
                    ltot::Origin::kMainline);
  const auto pool = synth->make_pool(tree, root);
  ltot::BudgetLedger ledger(
      static_cast<std::uint64_t>(cfg.integer("budget_cap", 100000)));
  ltot::lrsc::Race race(tree, *env, ledger, nullptr,
                        ltot::harness::race_params_from_config(cfg, seed));
  const int rungs = static_cast<int>(cfg.integer("trace_rungs", 4));
  const auto rows = race.trace_branch(pool.front(), rungs);

  std::printf("%-5s %-8s %-24s %-8s %-8s %-8s\n", "rung", "horizon", "leaf v",
              "V", "Vsmooth", "dVsmooth");
  for (const auto& row : rows) {
    std::string leaves;
    for (std::size_t i = 0; i < row.leaf_values.size(); ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.3f", row.leaf_values[i]);
      if (i) leaves += ", ";
      leaves += buf;
    }
    std::printf("%-5d %-8d %-24s %-8.3f %-8.3f %-+8.3f\n", row.rung, row.horizon,
                leaves.c_str(), row.raw, row.smoothed, row.delta_smooth);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lateral tree-of-thoughts racing harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string n0_csv;
  std::string events_dir;
  double eta = 4.0;

  auto* run = app.add_subcommand("run", "Run the experiment grid from a config");
  run->add_option("config", config_path, "config file")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep initial lateral widths");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--n0", n0_csv, "comma-separated widths, e.g. 32,64,128");

  auto* fit = app.add_subcommand("fit", "Fit the pseudolinear cost law");
  fit->add_option("events-dir", events_dir, "directory with summary.csv files")
      ->required();
  fit->add_option("--eta", eta, "culling factor used in the runs");

  auto* trace = app.add_subcommand("trace", "Per-horizon envelope table for one branch");
  trace->add_option("config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, n0_csv);
    if (fit->parsed()) return cmd_fit(events_dir, eta);
    if (trace->parsed()) return cmd_trace(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
