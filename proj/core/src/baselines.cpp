#include "ltot/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace ltot::baselines {

controller::SearchResult beam_tot(Environment& env, const BeamTotParams& params,
                                  BudgetLedger& ledger, EventLog* log) {
  Tree tree;
  controller::SearchResult res;

  const ChildSample root_sample = env.root();
  const NodeId root = tree.add_root(root_sample.payload, root_sample.v,
                                    std::clamp(root_sample.c_local, 0.0, 1.0),
                                    Origin::kMainline);
  if (root_sample.verified_solution) {
    res.solved = true;
    res.answer = root_sample.payload;
    res.time_to_first_verified = 0;
    return res;
  }

  std::vector<NodeId> frontier{root};
  for (int depth = 0; depth < params.depth_d && !frontier.empty(); ++depth) {
    const std::vector<NodeId> selected =
        controller::select_top_w(tree, frontier, params.beam_w);
    controller::MainlineBatch batch = controller::sample_mainline_children(
        tree, env, ledger, selected, params.k, params.seed, Charge::kMainline);

    std::vector<NodeId> children;
    children.reserve(batch.items.size());
    for (const auto& item : batch.items) {
      const NodeId id = tree.add_child(
          item.parent, item.sample.payload, item.sample.v,
          std::clamp(item.sample.c_local, 0.0, 1.0), Origin::kMainline,
          item.sample.verified_solution);
      children.push_back(id);
      if (log) {
        NodeEvent e;
        e.node_id = id;
        e.parent_id = item.parent;
        e.depth = tree.node(id).depth;
        e.origin = Origin::kMainline;
        e.v = item.sample.v;
        e.c_local = std::clamp(item.sample.c_local, 0.0, 1.0);
        e.ledger_category = Charge::kMainline;
        log->node(e);
      }
    }
    if (batch.solution_item) {
      res.solved = true;
      res.answer = batch.items[*batch.solution_item].sample.payload;
      res.time_to_first_verified = batch.spend_at_solution;
      break;
    }
    if (batch.out_of_budget) break;
    frontier = std::move(children);
  }

  res.total_expansions = ledger.spent();
  for (int c = 0; c < 5; ++c)
    res.per_category[static_cast<std::size_t>(c)] =
        ledger.category(static_cast<Charge>(c));
  return res;
}

lrsc::RaceResult sh_only(std::span<const NodeId> pool, double eta,
                         std::uint64_t b0, Tree& tree, Environment& env,
                         BudgetLedger& ledger, EventLog* log,
                         const lrsc::RaceParams& base, const PromotionBar& bar) {
  lrsc::RaceParams params = base;
  params.policy = lrsc::RacePolicy::kShOnly;
  params.eta = eta;
  params.b0 = b0;
  params.rho = 0.0;
  params.short_circuit = false;
  lrsc::Race race(tree, env, ledger, log, params);
  return race.run(pool, bar);
}

controller::SearchResult sh_mainline(Environment& env,
                                     const ShMainlineParams& params,
                                     BudgetLedger& ledger, EventLog* log) {
  Tree tree;
  controller::SearchResult res;

  const ChildSample root_sample = env.root();
  const NodeId root = tree.add_root(root_sample.payload, root_sample.v,
                                    std::clamp(root_sample.c_local, 0.0, 1.0),
                                    Origin::kMainline);
  // The root's children become the depth-race arms.
  controller::MainlineBatch batch = controller::sample_mainline_children(
      tree, env, ledger, std::vector<NodeId>{root}, params.k, params.seed,
      Charge::kMainline);
  std::vector<NodeId> arms;
  for (const auto& item : batch.items) {
    arms.push_back(tree.add_child(item.parent, item.sample.payload,
                                  item.sample.v,
                                  std::clamp(item.sample.c_local, 0.0, 1.0),
                                  Origin::kMainline,
                                  item.sample.verified_solution));
  }
  if (batch.solution_item) {
    res.solved = true;
    res.answer = batch.items[*batch.solution_item].sample.payload;
    res.time_to_first_verified = batch.spend_at_solution;
    res.total_expansions = ledger.spent();
    return res;
  }

  lrsc::RaceParams rp;
  rp.policy = lrsc::RacePolicy::kShOnly;
  rp.eta = params.eta;
  rp.b0 = params.b0;
  rp.rho = 0.0;
  rp.short_circuit = false;
  rp.seed = params.seed;
  PromotionBar bar;
  bar.value = 2.0;  // depth race only; promotion plays no role here
  lrsc::Race race(tree, env, ledger, log, rp);
  const lrsc::RaceResult rr = race.run(arms, bar);
  if (rr.solved && rr.solution_node) {
    res.solved = true;
    res.answer = tree.node(*rr.solution_node).step_payload;
    res.time_to_first_verified = rr.spend_at_solution;
  }
  res.total_expansions = ledger.spent();
  return res;
}

UncappedCount uncapped_mainline_count(double a_fraction, int k, int depth_d) {
  UncappedCount out;
  const double r = a_fraction * static_cast<double>(k);
  out.subcritical = r <= 1.0;
  out.expected_nodes = std::pow(r, depth_d);
  return out;
}

double simulate_uncapped_mainline(double a_fraction, int k, int depth_d,
                                  int trials, std::uint64_t seed) {
  // Binomial(k, a) offspring per node; population capped at 2^22 per trial.
  const rng::Stream stream = rng::Stream::of(seed, rng::kDomainSim);
  double total = 0.0;
  std::uint64_t counter = 0;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t population = 1;
    for (int d = 0; d < depth_d && population > 0; ++d) {
      std::uint64_t next = 0;
      for (std::uint64_t n = 0; n < population; ++n) {
        for (int j = 0; j < k; ++j) {
          if (rng::uniform(stream, counter++) < a_fraction) ++next;
        }
      }
      population = std::min<std::uint64_t>(next, 1u << 22);
    }
    total += static_cast<double>(population);
  }
  return total / static_cast<double>(trials);
}

}  // namespace ltot::baselines
