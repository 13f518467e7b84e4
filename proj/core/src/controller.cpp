#include "ltot/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltot::controller {

bool PlateauDetector::step(double delta_b, double compute_delta) {
  if (!(compute_delta > 0.0))
    throw std::invalid_argument("PlateauDetector: compute_delta must be > 0");
  const double x = delta_b / compute_delta;
  if (!seeded) {
    ewma = x;
    seeded = true;
  } else {
    ewma = ewma_beta * x + (1.0 - ewma_beta) * ewma;
  }
  if (plateaued) {
    if (ewma >= hysteresis) {
      plateaued = false;
      consecutive_low = 0;
    }
    return plateaued;
  }
  if (ewma < tau) {
    if (++consecutive_low >= patience) plateaued = true;
  } else {
    consecutive_low = 0;
  }
  return plateaued;
}

void PlateauDetector::reset() {
  seeded = false;
  ewma = 0.0;
  consecutive_low = 0;
  plateaued = false;
}

FrozenGroup FreezeThawCache::pop_oldest() {
  if (groups_.empty()) throw std::logic_error("FreezeThawCache: empty");
  FrozenGroup g = std::move(groups_.front());
  groups_.pop_front();
  return g;
}

bool FreezeThawCache::contains_signature(std::uint64_t sig) const {
  for (const auto& g : groups_)
    for (const auto& m : g.members)
      if (m.state.signature == sig) return true;
  return false;
}

int evict(FrozenGroup& group, const PromotionBar& bar, double kappa_u) {
  int evicted = 0;
  auto it = group.members.begin();
  while (it != group.members.end()) {
    FrozenBranch& m = *it;
    m.revisits += 1;
    const auto& point = m.state.env_stat.latest();
    const double ucb =
        point.smoothed +
        kappa_u * std::sqrt(2.0 * std::log(static_cast<double>(m.revisits) + 1.0) /
                            std::max(point.k_star, 1e-9));
    if (ucb < bar.value - bar.delta) {
      m.strikes += 1;
    } else {
      m.strikes = 0;
    }
    if (m.strikes >= 3) {
      it = group.members.erase(it);  // evicted branches never return
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::vector<NodeId> select_top_w(const Tree& tree, std::span<const NodeId> frontier,
                                 int w) {
  std::vector<NodeId> sorted(frontier.begin(), frontier.end());
  std::sort(sorted.begin(), sorted.end(), [&](NodeId a, NodeId b) {
    const double va = tree.node(a).v;
    const double vb = tree.node(b).v;
    if (va != vb) return va > vb;
    return a < b;
  });
  if (sorted.size() > static_cast<std::size_t>(w))
    sorted.resize(static_cast<std::size_t>(w));
  return sorted;
}

MainlineBatch sample_mainline_children(Tree& tree, Environment& env,
                                       BudgetLedger& ledger,
                                       std::span<const NodeId> selected, int k,
                                       std::uint64_t seed, Charge category) {
  MainlineBatch batch;
  std::vector<int> extra(selected.size(), 0);  // children drawn in this batch
  for (std::size_t s = 0; s < selected.size(); ++s) {
    const NodeId parent = selected[s];
    for (int j = 0; j < k; ++j) {
      if (!ledger.can_spend(1)) {
        batch.out_of_budget = true;
        return batch;
      }
      const SearchNode& p = tree.node(parent);
      ExpandQuery q;
      q.parent_payload = &p.step_payload;
      q.branch_uid = 0;
      q.depth = p.depth;
      q.branch_depth = 0;
      q.child_index = p.child_count + extra[s];
      q.rung = -1;
      q.stream = rng::Stream::of(seed, rng::kDomainExpand, parent);
      q.counter = static_cast<std::uint64_t>(q.child_index);
      const auto child = env.expand_one(q);
      if (!child) break;  // enumeration exhausted for this node
      ledger.charge(category);
      extra[s] += 1;
      batch.items.push_back({parent, *child});
      if (child->verified_solution && !batch.solution_item) {
        batch.solution_item = batch.items.size() - 1;
        batch.spend_at_solution = ledger.spent();
        return batch;  // stop at the first verified solution
      }
    }
  }
  return batch;
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

struct PhaseScope {
  EventLog* log;
  PhaseEvent e;
  explicit PhaseScope(EventLog* l, const char* phase, std::uint64_t spent,
                      double b_t)
      : log(l) {
    e.phase = phase;
    e.start_expansions = spent;
    e.b_t_before = b_t;
  }
  void close(std::uint64_t spent, double b_t, const char* outcome) {
    e.end_expansions = spent;
    e.b_t_after = b_t;
    e.outcome = outcome;
    if (log) log->phase(e);
  }
};

}  // namespace

SearchResult run(Environment& env, const ControllerConfig& cfg, EventLog* log) {
  Tree tree;
  BudgetLedger ledger(cfg.budget_cap);
  SearchResult res;

  const ChildSample root_sample = env.root();
  const NodeId root = tree.add_root(root_sample.payload, root_sample.v,
                                    clamp01(root_sample.c_local), Origin::kMainline);
  if (log) {
    NodeEvent e;
    e.node_id = root;
    e.depth = 0;
    e.origin = Origin::kMainline;
    e.v = root_sample.v;
    e.c_local = clamp01(root_sample.c_local);
    e.ledger_category = Charge::kMainline;
    log->node(e);
  }

  PromotionBar bar;
  bar.value = root_sample.v;
  bar.delta = cfg.delta_admit;
  bar.mode = cfg.bar_mode;
  bar.k_bar = cfg.k_bar;

  if (root_sample.verified_solution) {
    res.solved = true;
    res.answer = root_sample.payload;
    res.time_to_first_verified = 0;
    res.final_bar = bar.value;
    res.phase_log = log ? log->phase_events() : res.phase_log;
    return res;
  }

  std::vector<NodeId> mainline{root};
  std::vector<NodeId> pool;
  std::vector<std::uint64_t> pool_sigs;
  PlateauDetector det = cfg.plateau;
  FreezeThawCache cache;

  auto record_solution = [&](NodeId node, std::uint64_t spend) {
    if (res.solved) return;
    res.solved = true;
    res.answer = tree.node(node).step_payload;
    res.time_to_first_verified = spend;
  };

  enum class Status { kContinue, kSolved, kBudget, kExhausted };

  bool done = false;
  while (!done) {
    // ----- Exploitation phase.
    PhaseScope exploit_phase(log, "EXPLOIT", ledger.spent(), bar.value);
    Status status = Status::kContinue;
    bool plateau_exit = false;
    for (;;) {
      if (res.solved) {
        status = Status::kSolved;
        break;
      }
      if (ledger.remaining() == 0) {
        status = Status::kBudget;
        break;
      }
      if (mainline.empty()) {
        // An empty exploitation set signals an immediate plateau.
        if (pool.empty() && cache.empty()) {
          status = Status::kExhausted;
        } else {
          plateau_exit = true;
        }
        break;
      }

      const std::vector<NodeId> selected =
          select_top_w(tree, mainline, cfg.beam_w);
      const double bar_before = bar.value;
      const std::uint64_t spend_before = ledger.spent();
      MainlineBatch batch =
          sample_mainline_children(tree, env, ledger, selected, cfg.k_children,
                                   cfg.seed, Charge::kMainline);
      const std::uint64_t step_cost = ledger.spent() - spend_before;

      // Partition and create the children with their final origins.
      std::vector<ChildScore> scores;
      scores.reserve(batch.items.size());
      for (const auto& item : batch.items)
        scores.push_back({item.sample.v, clamp01(item.sample.c_local)});
      const Partition part =
          partition_children(scores, bar, cfg.lateral_c_threshold);

      std::vector<Origin> origins(batch.items.size(), Origin::kMainline);
      for (std::size_t idx : part.lateral) origins[idx] = Origin::kLateral;

      std::vector<NodeId> created(batch.items.size());
      for (std::size_t i = 0; i < batch.items.size(); ++i) {
        const auto& item = batch.items[i];
        created[i] = tree.add_child(item.parent, item.sample.payload,
                                    item.sample.v, clamp01(item.sample.c_local),
                                    origins[i], item.sample.verified_solution);
        if (log) {
          NodeEvent e;
          e.node_id = created[i];
          e.parent_id = item.parent;
          e.depth = tree.node(created[i]).depth;
          e.origin = origins[i];
          e.v = item.sample.v;
          e.c_local = clamp01(item.sample.c_local);
          e.ledger_category = Charge::kMainline;
          log->node(e);
        }
      }
      if (batch.solution_item)
        record_solution(created[*batch.solution_item], batch.spend_at_solution);

      std::vector<double> admitted_values;
      std::vector<NodeId> next_mainline;
      for (NodeId id : mainline) {
        if (std::find(selected.begin(), selected.end(), id) == selected.end())
          next_mainline.push_back(id);
      }
      for (std::size_t idx : part.mainline) {
        next_mainline.push_back(created[idx]);
        admitted_values.push_back(batch.items[idx].sample.v);
      }
      for (std::size_t idx : part.lateral) {
        const std::uint64_t sig = lrsc::dedup_signature(tree, created[idx]);
        if (std::find(pool_sigs.begin(), pool_sigs.end(), sig) != pool_sigs.end())
          continue;
        if (cache.contains_signature(sig)) continue;
        pool_sigs.push_back(sig);
        pool.push_back(created[idx]);
      }
      bar.update(admitted_values);
      mainline = std::move(next_mainline);

      if (res.solved) {
        status = Status::kSolved;
        break;
      }
      if (step_cost == 0) {
        // Selected nodes were all exhausted; drop them and continue.
        if (batch.items.empty() && batch.out_of_budget) {
          status = Status::kBudget;
          break;
        }
        continue;
      }
      const bool plateau =
          det.step(bar.value - bar_before, static_cast<double>(step_cost));
      if (plateau) {
        if (pool.empty() && cache.empty()) continue;  // nowhere to explore yet
        plateau_exit = true;
        break;
      }
    }
    exploit_phase.close(ledger.spent(), bar.value,
                        status == Status::kSolved      ? "SOLVED"
                        : status == Status::kBudget    ? "BUDGET"
                        : status == Status::kExhausted ? "EXHAUSTED"
                        : plateau_exit                 ? "PLATEAU"
                                                       : "CONTINUE");
    if (status == Status::kSolved || status == Status::kBudget ||
        status == Status::kExhausted) {
      done = true;
      break;
    }

    // ----- Exploration phase (LR-SC).
    PhaseScope explore_phase(log, "EXPLORE", ledger.spent(), bar.value);
    lrsc::RaceParams rp = cfg.race;
    rp.seed = cfg.seed;
    rp.budget_stop =
        ledger.spent() +
        static_cast<std::uint64_t>(cfg.explore_fraction *
                                   static_cast<double>(ledger.remaining()));
    const double bar_before_race = bar.value;
    const std::uint64_t race_start_spend = ledger.spent();

    lrsc::RaceResult rr;
    bool raced = false;
    if (!cache.empty()) {
      FrozenGroup group = cache.pop_oldest();
      cache.evictions += evict(group, bar, cfg.kappa_ucb);
      if (!group.members.empty()) {
        std::vector<lrsc::BranchState> states;
        states.reserve(group.members.size());
        for (auto& m : group.members) states.push_back(std::move(m.state));
        lrsc::Race race(tree, env, ledger, log, rp);
        rr = race.resume(std::move(states), group.rung, bar);
        raced = true;
      }
    } else if (!pool.empty()) {
      lrsc::Race race(tree, env, ledger, log, rp);
      rr = race.run(pool, bar);
      pool.clear();
      raced = true;
    }

    const char* outcome = "EMPTY";
    if (raced) {
      res.proposed_promotions += rr.proposed_promotions;
      res.false_promotions += rr.false_promotions;
      if (rr.solved && rr.solution_node) {
        record_solution(*rr.solution_node, rr.spend_at_solution);
        outcome = "SOLVED";
      } else if (rr.outcome == lrsc::RaceResult::Outcome::kPromoted &&
                 rr.promoted_node) {
        mainline.push_back(*rr.promoted_node);
        res.promotions.push_back(*rr.promoted_node);
        bar.update(std::vector<double>{tree.node(*rr.promoted_node).v});
        outcome = "PROMOTED";
      } else {
        FrozenGroup group;
        group.rung = rr.frozen_rung;
        for (auto& s : rr.frozen_survivors)
          group.members.push_back(FrozenBranch{std::move(s), 0, 0});
        if (!group.members.empty()) cache.push(std::move(group));
        outcome = "FROZEN";
      }
      const std::uint64_t race_cost = ledger.spent() - race_start_spend;
      if (race_cost > 0)
        det.step(bar.value - bar_before_race, static_cast<double>(race_cost));
    } else if (mainline.empty()) {
      done = true;  // nothing left to exploit or explore
      outcome = "EXHAUSTED";
    }
    explore_phase.close(ledger.spent(), bar.value, outcome);
    if (res.solved || ledger.remaining() == 0) done = true;
  }

  res.total_expansions = ledger.spent();
  res.final_bar = bar.value;
  for (int c = 0; c < 5; ++c)
    res.per_category[static_cast<std::size_t>(c)] =
        ledger.category(static_cast<Charge>(c));
  if (log) res.phase_log = log->phase_events();
  return res;
}

}  // namespace ltot::controller
