#include "ltot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ltot/baselines.hpp"
#include "ltot/controller.hpp"
#include "ltot/environments.hpp"
#include "ltot/stats.hpp"

namespace ltot::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace

CostFit fit_cost_curve(const std::vector<std::pair<double, double>>& points,
                       double eta) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_cost_curve: need >= 3 points");
  if (!(eta > 1.0)) throw std::invalid_argument("fit_cost_curve: eta must be > 1");
  std::vector<double> x, y;
  for (const auto& [n0, expansions] : points) {
    if (!(n0 > 1.0))
      throw std::invalid_argument("fit_cost_curve: n0 must be > 1");
    x.push_back(n0 * std::log(n0) / std::log(eta));
    y.push_back(expansions);
  }
  const stats::LinearFit f = stats::ols(x, y);
  CostFit out;
  out.a = f.slope;
  out.b = f.intercept;
  out.r_squared = f.r_squared;
  out.points = points;
  return out;
}

RungCostStats rung_cost_stats(std::span<const std::uint64_t> rung_spend) {
  if (rung_spend.size() < 2)
    throw std::invalid_argument("rung_cost_stats: need >= 2 rungs");
  std::vector<double> xs(rung_spend.begin(), rung_spend.end());
  RungCostStats out;
  out.mean = stats::mean(xs);
  const double sd = std::sqrt(stats::variance(xs));
  out.cv = out.mean == 0.0 ? 0.0 : sd / out.mean;
  return out;
}

RungCostStats rung_cost_stats(const EventLog& log) {
  std::vector<std::uint64_t> per_rung;
  for (const RungEvent& e : log.rung_events()) {
    if (e.rung >= static_cast<int>(per_rung.size()))
      per_rung.resize(static_cast<std::size_t>(e.rung) + 1, 0);
    per_rung[static_cast<std::size_t>(e.rung)] += e.expansions;
  }
  return rung_cost_stats(per_rung);
}

std::string MetricsSummary::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["cells"] = cells;
  j["success_rate"] = success_rate;
  j["false_promotion_rate"] = false_promotion_rate;
  j["promotion_selectivity"] = promotion_selectivity;
  if (time_to_first_hit)
    j["time_to_first_hit_median"] = *time_to_first_hit;
  else
    j["time_to_first_hit_median"] = nullptr;
  if (rung_cost_cv)
    j["rung_cost_cv"] = *rung_cost_cv;
  else
    j["rung_cost_cv"] = nullptr;
  j["rung_count_mean"] = rung_count_mean;
  j["rung_count_sd"] = rung_count_sd;
  return j.dump(2);
}

std::unique_ptr<Environment> make_environment(const Config& cfg, std::int64_t n0,
                                              std::uint64_t seed) {
  const std::string env = cfg.str("env", "null");
  NoiseModel noise;
  noise.family = noise_family_from_string(cfg.str("env_noise", "gaussian"));
  noise.scale = cfg.num("env_noise_scale", 0.02);
  noise.contamination = cfg.num("env_contamination", 0.05);
  noise.inflation = cfg.num("env_inflation", 10.0);

  if (env == "null" || env == "declining_null" || env == "delayed_payoff" ||
      env == "riser" || env == "correlated") {
    envs::SyntheticSpec spec;
    spec.noise = noise;
    spec.seed = seed;
    spec.c_spread = 0.1;
    spec.drift_amplitude = cfg.num("env_drift_amplitude", 0.0);
    const double base = cfg.num("env_base", 0.5);
    const double drift = cfg.num("env_drift", 0.0);
    const int n = static_cast<int>(n0);
    if (env == "null") {
      spec.profiles = envs::null_pool(n, base);
    } else if (env == "declining_null") {
      spec.profiles = envs::declining_null_pool(n, base, drift);
    } else if (env == "correlated") {
      spec.profiles = envs::clustered_null_pool(
          n, static_cast<int>(cfg.integer("env_clusters", 4)), base);
      spec.rho = cfg.num("env_rho", 0.5);
    } else {
      // delayed_payoff / riser: one planted branch in a declining-null pool.
      spec.profiles = envs::declining_null_pool(n, base,
                                                cfg.num("env_drift", -0.02));
      const int slot =
          cfg.has("env_planted")
              ? static_cast<int>(cfg.integer("env_planted", 0))
              : static_cast<int>(rng::mix64(seed ^ 0x9e11) % std::max(1, n));
      envs::BranchProfile planted;
      if (env == "delayed_payoff") {
        planted = envs::delayed_profile(cfg.num("env_base", 0.5) - 0.2,
                                        static_cast<int>(cfg.integer("env_hstar", 8)),
                                        cfg.num("env_gamma", 0.06),
                                        static_cast<int>(cfg.integer("env_order", 1)));
      } else {
        planted = envs::delayed_profile(cfg.num("env_base", 0.5) - 0.05, 0,
                                        cfg.num("env_gamma", 0.05), 1);
      }
      planted.c_mean = 0.85;
      spec.profiles[static_cast<std::size_t>(slot)] = planted;
    }
    return std::make_unique<envs::SyntheticRaceEnv>(std::move(spec));
  }
  if (env == "horizon_bias") {
    envs::HorizonBiasSpec spec;
    spec.lambda_bias = cfg.num("env_lambda_bias", 0.1);
    spec.planted_delta = static_cast<int>(cfg.integer("env_delta", 4));
    spec.mu_planted = cfg.num("env_mu", 0.9);
    spec.noise = noise;
    spec.c_consistent = cfg.num("env_c_consistent", 0.85);
    spec.c_inconsistent = cfg.num("env_c_inconsistent", 0.45);
    spec.seed = seed;
    return std::make_unique<envs::HorizonBiasEnv>(spec);
  }
  if (env == "planted_path") {
    envs::PlantedPathSpec spec;
    spec.solution_depth = static_cast<int>(cfg.integer("env_solution_depth", 5));
    spec.noise = noise;
    spec.seed = seed;
    return std::make_unique<envs::PlantedPathEnv>(spec);
  }
  if (env == "game24") {
    game24::Instance inst{};
    if (cfg.has("env_instances")) {
      std::ifstream f(cfg.str("env_instances", ""));
      if (!f)
        throw std::runtime_error("game24: cannot open instances file " +
                                 cfg.str("env_instances", ""));
      std::stringstream buf;
      buf << f.rdbuf();
      const auto instances = game24::parse_instances(buf.str());
      if (instances.empty()) throw std::invalid_argument("game24: no instances");
      inst = instances[static_cast<std::size_t>(seed % instances.size())];
    } else {
      const std::string text = cfg.str("env_instance", "6,6,6,6");
      const auto instances = game24::parse_instances(text);
      inst = instances.at(0);
    }
    return std::make_unique<envs::Game24Env>(envs::Game24Spec{inst, seed});
  }
  throw std::invalid_argument("unknown env '" + env + "'");
}

lrsc::RaceParams race_params_from_config(const Config& cfg, std::uint64_t seed) {
  lrsc::RaceParams p;
  p.eta = cfg.num("eta", 4.0);
  p.b0 = static_cast<std::uint64_t>(cfg.integer("b0", 1));
  p.b_micro = static_cast<std::uint64_t>(cfg.integer("b_micro", 1));
  p.rho = cfg.num("rho", 0.15);
  p.m_mu = static_cast<int>(cfg.integer("m_mu", 3));
  p.alpha_smooth = cfg.num("alpha_smooth", 0.5);
  p.window = static_cast<int>(cfg.integer("window", 4));
  {
    std::vector<std::int64_t> orders = cfg.int_list("orders", {1, 2});
    p.orders.clear();
    for (auto o : orders) p.orders.push_back(static_cast<int>(o));
  }
  const std::string family = cfg.str("bar_family", "sub_gaussian");
  if (family == "sub_gaussian")
    p.bar_params.family = continuation::BarFamily::kSubGaussian;
  else if (family == "sub_gamma")
    p.bar_params.family = continuation::BarFamily::kSubGamma;
  else if (family == "sub_weibull")
    p.bar_params.family = continuation::BarFamily::kSubWeibull;
  else
    throw std::invalid_argument("unknown bar_family '" + family + "'");
  p.bar_params.kappa = cfg.num("kappa", 1.0);
  p.bar_params.delta = cfg.num("delta", 0.1);
  p.bar_params.nu_r = cfg.num("nu_r", 1.0);
  p.bar_params.c_r = cfg.num("c_r", 0.0);
  p.bar_params.epsilon_r = cfg.num("epsilon_r", 0.05);
  p.bar_params.k_r = cfg.num("k_r", 1.0);
  p.bar_params.alpha_w = cfg.num("alpha_w", 1.0);
  p.calibrate_tail = cfg.boolean("calibrate_tail", false);
  p.short_circuit = cfg.boolean("short_circuit", true);
  p.depth_banded = cfg.boolean("depth_banded", false);
  p.use_effective_width = cfg.boolean("use_effective_width", true);
  const std::string agg = cfg.str("aggregator", "top_k");
  if (agg == "top_k")
    p.aggregator = envelope::Aggregator::kTopK;
  else if (agg == "weighted")
    p.aggregator = envelope::Aggregator::kWeighted;
  else if (agg == "trimmed")
    p.aggregator = envelope::Aggregator::kTrimmedMean;
  else if (agg == "power")
    p.aggregator = envelope::Aggregator::kPowerMean;
  else
    throw std::invalid_argument("unknown aggregator '" + agg + "'");
  p.weighted_spec.omega_max = cfg.num("omega_max", 0.6);
  p.weighted_spec.temperature = cfg.num("temperature", 0.25);
  const std::string sched = cfg.str("horizon_schedule", "geometric");
  if (sched != "geometric") {
    std::vector<std::int64_t> hs = cfg.int_list("horizon_schedule", {});
    p.horizon_schedule.clear();
    for (auto h : hs) p.horizon_schedule.push_back(static_cast<int>(h));
  }
  p.threads = static_cast<int>(cfg.integer("threads", 1));
  p.delta_promote = cfg.num("delta_promote", cfg.num("delta", 0.1));
  p.tau_v = cfg.num("tau_v", 0.85);
  p.tau_c = cfg.num("tau_c", 0.75);
  p.seed = seed;
  return p;
}

std::vector<std::uint64_t> seeds_from_config(const Config& cfg) {
  const std::uint64_t base = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  std::vector<std::uint64_t> out;
  if (!cfg.has("seeds")) {
    out.push_back(base);
    return out;
  }
  const std::string raw = cfg.str("seeds", "");
  if (raw.find(',') != std::string::npos) {
    for (auto s : cfg.int_list("seeds", {}))
      out.push_back(static_cast<std::uint64_t>(s));
    return out;
  }
  const std::int64_t count = cfg.integer("seeds", 1);
  for (std::int64_t i = 0; i < count; ++i)
    out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

CellResult run_cell(const Config& cfg, std::int64_t n0, std::uint64_t seed) {
  const std::string policy = cfg.str("policy", "ltot");
  CellResult cell;
  cell.policy = policy;
  cell.env = cfg.str("env", "null");
  cell.n0 = n0;
  cell.seed = seed;

  auto env = make_environment(cfg, n0, seed);
  EventLog log;
  log.set_run_header(policy, cell.env, static_cast<std::uint64_t>(n0), seed);
  const std::uint64_t budget_cap =
      static_cast<std::uint64_t>(cfg.integer("budget_cap", 100000));

  if (policy == "ltot") {
    controller::ControllerConfig cc;
    cc.beam_w = static_cast<int>(cfg.integer("beam_w", 2));
    cc.k_children = static_cast<int>(cfg.integer("k_children", 4));
    cc.budget_cap = budget_cap;
    cc.lateral_c_threshold = cfg.num("lateral_c_threshold", 0.7);
    cc.explore_fraction = cfg.num("explore_fraction", 0.7);
    cc.delta_admit = cfg.num("delta", 0.1);
    cc.race = race_params_from_config(cfg, seed);
    cc.seed = seed;
    const auto res = controller::run(*env, cc, &log);
    cell.solved = res.solved;
    cell.total_expansions = res.total_expansions;
    cell.time_to_first_hit = res.time_to_first_verified;
    cell.proposed_promotions = res.proposed_promotions;
    cell.false_promotions = res.false_promotions;
    cell.promotions = static_cast<int>(res.promotions.size());
    cell.lateral_expansions = res.per_category[1] + res.per_category[2];
    cell.outcome = res.solved ? "SOLVED" : "STOPPED";
    std::vector<std::uint64_t> per_rung;
    for (const RungEvent& e : log.rung_events()) {
      if (e.rung >= static_cast<int>(per_rung.size()))
        per_rung.resize(static_cast<std::size_t>(e.rung) + 1, 0);
      per_rung[static_cast<std::size_t>(e.rung)] += e.expansions;
      cell.rungs_executed = std::max(cell.rungs_executed, e.rung + 1);
    }
    if (per_rung.size() >= 2) cell.rung_stats = rung_cost_stats(per_rung);
  } else if (policy == "beam_tot") {
    BudgetLedger ledger(budget_cap);
    baselines::BeamTotParams bp;
    bp.beam_w = static_cast<int>(cfg.integer("beam_w", 2));
    bp.k = static_cast<int>(cfg.integer("k_children", 4));
    bp.depth_d = static_cast<int>(cfg.integer("depth_d", 8));
    bp.seed = seed;
    const auto res = baselines::beam_tot(*env, bp, ledger, &log);
    cell.solved = res.solved;
    cell.total_expansions = res.total_expansions;
    cell.time_to_first_hit = res.time_to_first_verified;
    cell.outcome = res.solved ? "SOLVED" : "STOPPED";
  } else if (policy == "sh_mainline") {
    BudgetLedger ledger(budget_cap);
    baselines::ShMainlineParams sp;
    sp.eta = cfg.num("eta", 4.0);
    sp.b0 = static_cast<std::uint64_t>(cfg.integer("b0", 1));
    sp.k = static_cast<int>(cfg.integer("k_children", 4));
    sp.seed = seed;
    const auto res = baselines::sh_mainline(*env, sp, ledger, &log);
    cell.solved = res.solved;
    cell.total_expansions = res.total_expansions;
    cell.time_to_first_hit = res.time_to_first_verified;
    cell.outcome = res.solved ? "SOLVED" : "STOPPED";
  } else if (policy == "lrsc" || policy == "sh_only") {
    auto* synth = dynamic_cast<envs::SyntheticRaceEnv*>(env.get());
    if (!synth)
      throw std::invalid_argument("policy '" + policy +
                                  "' needs a synthetic race environment");
    Tree tree;
    const ChildSample root_sample = env->root();
    const NodeId root =
        tree.add_root(root_sample.payload, root_sample.v, 0.85, Origin::kMainline);
    const std::vector<NodeId> pool = synth->make_pool(tree, root);
    BudgetLedger ledger(budget_cap);
    lrsc::RaceParams rp = race_params_from_config(cfg, seed);
    if (policy == "sh_only") {
      rp.policy = lrsc::RacePolicy::kShOnly;
      rp.rho = 0.0;
      rp.short_circuit = false;
    }
    PromotionBar bar;
    bar.value = cfg.num("b_t0", 0.9);
    bar.delta = cfg.num("delta", 0.1);
    lrsc::Race race(tree, *env, ledger, &log, rp);
    const auto rr = race.run(pool, bar);
    cell.solved = rr.solved;
    cell.total_expansions = ledger.spent();
    if (rr.solved) cell.time_to_first_hit = rr.spend_at_solution;
    cell.rungs_executed = rr.rungs_executed;
    cell.lateral_expansions = rr.expansions_spent;
    cell.proposed_promotions = rr.proposed_promotions;
    cell.false_promotions = rr.false_promotions;
    cell.promotions =
        rr.outcome == lrsc::RaceResult::Outcome::kPromoted ? 1 : 0;
    if (rr.rung_spend.size() >= 2) cell.rung_stats = rung_cost_stats(rr.rung_spend);
    cell.outcome = rr.outcome == lrsc::RaceResult::Outcome::kPromoted ? "PROMOTED"
                   : rr.outcome == lrsc::RaceResult::Outcome::kSolved ? "SOLVED"
                                                                      : "FROZEN";
  } else {
    throw std::invalid_argument("unknown policy '" + policy + "'");
  }

  cell.events = log.dump();
  return cell;
}

std::string summary_csv_header() {
  return "policy,env,n0,seed,solved,total_expansions,time_to_first_hit,"
         "rungs_executed,lateral_expansions,rung_cost_mean,rung_cost_cv,"
         "proposed_promotions,false_promotions,promotions,outcome";
}

std::string cell_csv_row(const CellResult& c) {
  std::string row;
  row += c.policy + "," + c.env + "," + std::to_string(c.n0) + "," +
         std::to_string(c.seed) + ",";
  row += (c.solved ? "1" : "0");
  row += "," + std::to_string(c.total_expansions) + ",";
  row += c.time_to_first_hit ? std::to_string(*c.time_to_first_hit) : "";
  row += "," + std::to_string(c.rungs_executed) + "," +
         std::to_string(c.lateral_expansions) + ",";
  row += c.rung_stats ? fmt(c.rung_stats->mean) : "";
  row += ",";
  row += c.rung_stats ? fmt(c.rung_stats->cv) : "";
  row += "," + std::to_string(c.proposed_promotions) + "," +
         std::to_string(c.false_promotions) + "," + std::to_string(c.promotions) +
         "," + c.outcome;
  return row;
}

ExperimentResult run_experiment(const Config& cfg) {
  const std::vector<std::uint64_t> seeds = seeds_from_config(cfg);
  std::vector<std::int64_t> n0s = cfg.int_list("n0", {64});
  std::sort(n0s.begin(), n0s.end());
  if (seeds.empty() || n0s.empty())
    throw std::invalid_argument("run_experiment: empty grid");

  struct CellSpec {
    std::int64_t n0;
    std::uint64_t seed;
  };
  std::vector<CellSpec> grid;
  for (std::int64_t n0 : n0s)
    for (std::uint64_t s : seeds) grid.push_back({n0, s});

  ExperimentResult out;
  out.cells.resize(grid.size());
  const int threads =
      std::max(1, static_cast<int>(cfg.integer("threads", 1)));
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      out.cells[i] = run_cell(cfg, grid[i].n0, grid[i].seed);
  };
  if (threads == 1 || grid.size() < 2) {
    worker(0, grid.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk =
        (grid.size() + static_cast<std::size_t>(threads) - 1) /
        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t lo = std::min(grid.size(), static_cast<std::size_t>(t) * chunk);
      const std::size_t hi = std::min(grid.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  // Canonical reduction order: (policy, env, n0, seed) — policy and env are
  // fixed per run, the grid is already sorted by (n0, seed).
  std::string csv = "# schema_version=1\n";
  csv += summary_csv_header() + "\n";
  for (const CellResult& c : out.cells) csv += cell_csv_row(c) + "\n";
  out.summary_csv = csv;

  MetricsSummary& m = out.summary;
  m.cells = static_cast<int>(out.cells.size());
  int solved = 0, proposed = 0, failed = 0;
  std::vector<double> hits, rung_counts, cvs;
  for (const CellResult& c : out.cells) {
    if (c.solved) ++solved;
    proposed += c.proposed_promotions;
    failed += c.false_promotions;
    if (c.solved && c.time_to_first_hit)
      hits.push_back(static_cast<double>(*c.time_to_first_hit));
    rung_counts.push_back(static_cast<double>(c.rungs_executed));
    if (c.rung_stats) cvs.push_back(c.rung_stats->cv);
  }
  m.success_rate = static_cast<double>(solved) / static_cast<double>(m.cells);
  m.false_promotion_rate =
      proposed == 0 ? 0.0 : static_cast<double>(failed) / proposed;
  m.promotion_selectivity =
      proposed == 0 ? 1.0 : static_cast<double>(proposed - failed) / proposed;
  if (!hits.empty()) m.time_to_first_hit = stats::quantile(hits, 0.5);
  if (!cvs.empty()) m.rung_cost_cv = stats::mean(cvs);
  m.rung_count_mean = stats::mean(rung_counts);
  m.rung_count_sd = std::sqrt(stats::variance(rung_counts));

  const std::string out_dir = cfg.str("out_dir", "");
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const CellResult& c : out.cells) {
      const std::string name = "events-" + c.policy + "-" + c.env + "-n" +
                               std::to_string(c.n0) + "-s" +
                               std::to_string(c.seed) + ".jsonl";
      std::ofstream f(std::filesystem::path(out_dir) / name, std::ios::binary);
      f << c.events;
    }
    std::ofstream csvf(std::filesystem::path(out_dir) / "summary.csv",
                       std::ios::binary);
    csvf << out.summary_csv;
    std::ofstream mf(std::filesystem::path(out_dir) / "metrics.json",
                     std::ios::binary);
    mf << m.to_json() << "\n";
  }
  return out;
}

}  // namespace ltot::harness
