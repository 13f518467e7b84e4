#include "ltot/lrsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ltot/consistency.hpp"
#include "ltot/promotion.hpp"

namespace ltot::lrsc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<std::size_t> select_quota(std::span<const double> z,
                                      std::span<const NodeId> ids, double eta) {
  if (z.size() != ids.size()) throw std::invalid_argument("select_quota: size mismatch");
  if (!(eta > 1.0)) throw std::invalid_argument("select_quota: eta must be > 1");
  const std::size_t quota =
      static_cast<std::size_t>(static_cast<double>(z.size()) / eta);
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (z[a] != z[b]) return z[a] > z[b];
    return ids[a] < ids[b];
  });
  order.resize(quota);
  return order;
}

std::vector<std::size_t> select_overflow(std::span<const double> z,
                                         std::span<const NodeId> ids,
                                         double bar_value,
                                         std::span<const std::size_t> top_set,
                                         double rho) {
  std::vector<bool> in_top(z.size(), false);
  for (std::size_t t : top_set) in_top[t] = true;
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (!in_top[i] && z[i] >= bar_value) cand.push_back(i);
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    if (z[a] != z[b]) return z[a] > z[b];
    return ids[a] < ids[b];
  });
  const std::size_t cap =
      static_cast<std::size_t>(rho * static_cast<double>(z.size()));
  if (cand.size() > cap) cand.resize(cap);
  return cand;
}

std::uint64_t dedup_signature(const Tree& tree, NodeId id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Payload& p : tree.payload_path(id))
    h = fnv1a(promotion::normalize_answer(p) + "\x1e", h);
  return h;
}

// ---------------------------------------------------------------------------

struct Race::ProbeBuffer {
  struct Creation {
    int parent_local = 0;
    ChildSample child;
  };
  std::vector<Creation> creations;
  std::vector<int> exhausted;  // local indices found unexpandable
};

Race::Race(Tree& tree, Environment& env, BudgetLedger& ledger, EventLog* log,
           RaceParams params)
    : tree_(tree), env_(env), ledger_(ledger), log_(log), params_(std::move(params)) {
  if (!(params_.eta > 1.0)) throw std::invalid_argument("Race: eta must be > 1");
  if (params_.orders.empty()) throw std::invalid_argument("Race: empty order set");
}

int Race::horizon_at(int rung) const {
  const auto& sched = params_.horizon_schedule;
  if (!sched.empty()) {
    if (rung < static_cast<int>(sched.size()))
      return sched[static_cast<std::size_t>(rung)];
    int h = sched.back();
    for (int r = static_cast<int>(sched.size()); r <= rung; ++r) h *= 2;
    return h;
  }
  return 1 << std::min(rung, 30);
}

std::uint64_t Race::full_budget(int rung) const {
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(params_.b0) * std::pow(params_.eta, rung)));
}

std::uint64_t Race::planned_rung_cost(std::span<const BranchState> active,
                                      int rung) const {
  std::uint64_t cost = 0;
  for (const auto& b : active)
    cost += b.probation ? params_.b_micro : full_budget(rung);
  return cost;
}

BranchState Race::admit(NodeId uid) {
  const SearchNode& n = tree_.node(uid);
  BranchState b;
  b.uid = uid;
  b.parent_depth = n.depth;
  b.signature = dedup_signature(tree_, uid);
  b.beam.m_mu = params_.m_mu;
  b.beam.reset(0);
  b.beam.offer(uid, n.v);
  b.nodes.push_back(LocalNode{uid, 0, n.v, n.step_payload, n.child_count, false});
  b.env_stat.branch_uid = uid;
  b.env_stat.alpha = params_.alpha_smooth;
  double k_star = 0.0;
  const double v0 = aggregate(b.beam.values(), &k_star);
  b.env_stat.append(0, 0, v0, k_star);
  return b;
}

double Race::aggregate(const std::vector<double>& values, double* k_star) const {
  switch (params_.aggregator) {
    case envelope::Aggregator::kTopK:
      *k_star = static_cast<double>(std::min<std::size_t>(
          values.size(), static_cast<std::size_t>(params_.m_mu)));
      return envelope::top_k_mean(values, params_.m_mu);
    case envelope::Aggregator::kWeighted: {
      const auto we = envelope::weighted_envelope(values, params_.weighted_spec);
      *k_star = we.k_eff;
      return we.value;
    }
    case envelope::Aggregator::kTrimmedMean:
      *k_star = static_cast<double>(values.size());
      return envelope::trimmed_mean(values, 0.1);
    case envelope::Aggregator::kPowerMean:
      *k_star = static_cast<double>(values.size());
      return envelope::power_mean(values, 1.5);
  }
  throw std::logic_error("Race: unknown aggregator");
}

Race::ProbeBuffer Race::simulate_branch(const BranchState& b, std::uint64_t budget,
                                        int h_target, int rung) {
  ProbeBuffer buf;
  std::vector<LocalNode> nodes = b.nodes;
  std::uint64_t counter = b.probes;
  const rng::Stream stream = rng::Stream::of(params_.seed, rng::kDomainExpand, b.uid);

  std::uint64_t spent = 0;
  while (spent < budget) {
    // Deepest expandable node below the rung horizon; ties by v, then by
    // creation order (equivalently ascending node id once committed).
    int best = -1;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const LocalNode& n = nodes[static_cast<std::size_t>(i)];
      if (n.exhausted || n.branch_depth >= h_target) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      const LocalNode& cur = nodes[static_cast<std::size_t>(best)];
      if (n.branch_depth > cur.branch_depth ||
          (n.branch_depth == cur.branch_depth && n.v > cur.v)) {
        best = i;
      }
    }
    if (best < 0) break;

    LocalNode& parent = nodes[static_cast<std::size_t>(best)];
    ExpandQuery q;
    q.parent_payload = &parent.payload;
    q.branch_uid = b.uid;
    q.depth = b.parent_depth + parent.branch_depth;
    q.branch_depth = parent.branch_depth;
    q.child_index = parent.child_count;
    q.rung = rung;
    q.stream = stream;
    q.counter = counter;
    const auto child = env_.expand_one(q);
    if (!child) {
      parent.exhausted = true;
      buf.exhausted.push_back(best);
      continue;
    }
    parent.child_count += 1;
    LocalNode local;
    local.branch_depth = parent.branch_depth + 1;
    local.v = child->v;
    local.payload = child->payload;
    nodes.push_back(local);
    buf.creations.push_back({best, *child});
    ++counter;
    ++spent;
  }
  return buf;
}

void Race::apply_buffer(BranchState& b, const ProbeBuffer& buf, Charge category,
                        RaceResult& result) {
  for (const auto& c : buf.creations) {
    if (!ledger_.can_spend(1)) break;
    if (params_.budget_stop && ledger_.spent() + 1 > params_.budget_stop) break;
    LocalNode& parent = b.nodes[static_cast<std::size_t>(c.parent_local)];
    const NodeId real = tree_.add_child(parent.id, c.child.payload, c.child.v,
                                        c.child.c_local, Origin::kLateral,
                                        c.child.verified_solution);
    ledger_.charge(category);
    b.compute += 1;
    b.probes += 1;
    b.rung_spent += 1;
    parent.child_count += 1;

    LocalNode local;
    local.id = real;
    local.branch_depth = parent.branch_depth + 1;
    local.v = c.child.v;
    local.payload = c.child.payload;
    b.nodes.push_back(local);
    b.last_probe_parent = c.parent_local;
    b.last_probe_child = static_cast<int>(b.nodes.size()) - 1;

    if (local.branch_depth > b.horizon) {
      b.horizon = local.branch_depth;
      b.beam.reset(b.horizon);
      b.beam.offer(real, local.v);
    } else if (local.branch_depth == b.horizon) {
      b.beam.offer(real, local.v);
    }
    if (log_) {
      NodeEvent e;
      e.node_id = real;
      e.parent_id = parent.id;
      e.depth = tree_.node(real).depth;
      e.origin = Origin::kLateral;
      e.v = c.child.v;
      e.c_local = c.child.c_local;
      e.ledger_category = category;
      log_->node(e);
    }
    if (c.child.verified_solution && !result.solved) {
      result.solved = true;
      result.solution_node = real;
      result.spend_at_solution = ledger_.spent();
      break;  // a verified solution short-circuits everything
    }
  }
  for (int idx : buf.exhausted)
    b.nodes[static_cast<std::size_t>(idx)].exhausted = true;
}

bool Race::confirm_probe(BranchState& b, Charge category, RaceResult& result) {
  if (b.last_probe_parent < 0 || b.last_probe_child < 0) return false;
  if (!ledger_.can_spend(1)) return false;  // EXHAUSTED
  if (params_.budget_stop && ledger_.spent() + 1 > params_.budget_stop) return false;
  LocalNode& parent = b.nodes[static_cast<std::size_t>(b.last_probe_parent)];
  if (parent.exhausted) return false;

  ExpandQuery q;
  q.parent_payload = &parent.payload;
  q.branch_uid = b.uid;
  q.depth = b.parent_depth + parent.branch_depth;
  q.branch_depth = parent.branch_depth;
  q.child_index = parent.child_count;
  q.rung = -1;
  q.stream = rng::Stream::of(params_.seed, rng::kDomainConfirm, b.uid);
  q.counter = b.confirm_probes;
  const auto child = env_.expand_one(q);
  if (!child) {
    parent.exhausted = true;
    return false;
  }
  b.confirm_probes += 1;
  b.compute += 1;
  if (category == Charge::kLateralMicro) b.rung_spent += 1;
  parent.child_count += 1;
  const NodeId real =
      tree_.add_child(parent.id, child->payload, child->v, child->c_local,
                      Origin::kLateral, child->verified_solution);
  ledger_.charge(category);

  LocalNode local;
  local.id = real;
  local.branch_depth = parent.branch_depth + 1;
  local.v = child->v;
  local.payload = child->payload;
  b.nodes.push_back(local);

  if (log_) {
    NodeEvent e;
    e.node_id = real;
    e.parent_id = parent.id;
    e.depth = tree_.node(real).depth;
    e.origin = Origin::kLateral;
    e.v = child->v;
    e.c_local = child->c_local;
    e.ledger_category = category;
    log_->node(e);
  }
  if (child->verified_solution && !result.solved) {
    result.solved = true;
    result.solution_node = real;
    result.spend_at_solution = ledger_.spent();
  }

  // Re-measure the last envelope point with the prior probe's contribution
  // replaced by the fresh draw.
  const NodeId old_child = b.nodes[static_cast<std::size_t>(b.last_probe_child)].id;
  envelope::MicroBeam remeasured = b.beam;
  remeasured.remove(old_child);
  if (local.branch_depth == remeasured.horizon) remeasured.offer(real, local.v);
  if (!remeasured.empty()) {
    double k_star = 0.0;
    const double v = aggregate(remeasured.values(), &k_star);
    b.env_stat.replace_last(v, k_star);
    if (log_) {
      EnvelopeEvent ee;
      ee.branch_id = b.uid;
      ee.h = b.env_stat.latest().horizon;
      ee.c = b.env_stat.latest().compute;
      ee.v_raw = v;
      ee.v_smooth = b.env_stat.latest().smoothed;
      ee.k_star = k_star;
      log_->envelope(ee);
    }
  }
  // Both the original and the fresh leaf compete in the beam afterwards.
  if (local.branch_depth == b.beam.horizon) b.beam.offer(real, local.v);
  b.last_probe_child = static_cast<int>(b.nodes.size()) - 1;
  return true;
}

void Race::refresh_envelope_point(BranchState& b, bool append) {
  const std::vector<double> values = b.beam.values();
  if (values.empty()) return;
  double k_star = 0.0;
  const double v = aggregate(values, &k_star);
  if (append) {
    if (!b.env_stat.history.empty() && b.compute <= b.env_stat.latest().compute)
      return;  // no fresh spend this rung
    b.env_stat.append(b.horizon, b.compute, v, k_star);
  } else {
    b.env_stat.replace_last(v, k_star);
  }
  if (log_) {
    EnvelopeEvent e;
    e.branch_id = b.uid;
    e.h = b.env_stat.latest().horizon;
    e.c = b.env_stat.latest().compute;
    e.v_raw = v;
    e.v_smooth = b.env_stat.latest().smoothed;
    e.k_star = k_star;
    log_->envelope(e);
  }
}

void Race::compute_order_gains(BranchState& b) const {
  b.order_gains.assign(params_.orders.size(), kNan);
  for (std::size_t i = 0; i < params_.orders.size(); ++i) {
    try {
      b.order_gains[i] = continuation::fit_forecast(
          b.env_stat.history, params_.orders[i], params_.window,
          static_cast<double>(params_.b_micro));
    } catch (const std::exception&) {
      // insufficient history or degenerate design; order stays unavailable
    }
  }
}

bool Race::attempt_promotion(BranchState& b, const PromotionBar& bar,
                             RaceResult& result) {
  const double threshold = bar.value + params_.delta_promote;
  const bool confirm_ok = confirm_probe(b, Charge::kConfirm, result);
  if (result.solved) return false;
  const double v_after =
      b.env_stat.history.empty() ? kNegInf : b.env_stat.latest().smoothed;
  const bool gate_budget_ok =
      ledger_.can_spend(1) &&
      !(params_.budget_stop && ledger_.spent() + 1 > params_.budget_stop);
  if (!confirm_ok || v_after < threshold || !gate_budget_ok) {
    if (log_) {
      PromotionEvent e;
      e.branch_id = b.uid;
      e.gate = env_.has_exact_verifier() ? "VERIFIER" : "DUAL";
      e.accepted = false;
      e.reason = "FAIL_CONFIRM";
      e.v_score = v_after;
      log_->promotion(e);
    }
    return false;
  }

  result.proposed_promotions += 1;
  const envelope::MicroBeam::Leaf best = b.beam.leaves.front();
  promotion::PromotionDecision decision;
  if (env_.has_exact_verifier()) {
    ledger_.charge(Charge::kPromotionCheck);
    const Payload payload = tree_.node(best.node_id).step_payload;
    decision =
        promotion::verifier_gate(true, true, [&] { return env_.verify(payload); });
  } else {
    const auto c_path =
        consistency::path_consistency(tree_.c_local_path(best.node_id));
    double tau_c = params_.tau_c;
    bool rederive_required = false;
    if (env_.lm_only_consistency()) {
      tau_c = std::min(1.0, tau_c + 0.1);
      rederive_required = true;
    }
    bool rederive_ok = true;
    ledger_.charge(Charge::kPromotionCheck);  // validator / re-derivation probe
    if (rederive_required) {
      rederive_ok = false;
      const SearchNode& leaf = tree_.node(best.node_id);
      if (leaf.parent) {
        const SearchNode& parent = tree_.node(*leaf.parent);
        ExpandQuery q;
        q.parent_payload = &parent.step_payload;
        q.branch_uid = b.uid;
        q.depth = parent.depth;
        q.branch_depth = parent.depth - b.parent_depth;
        q.child_index = parent.child_count;
        q.rung = -1;
        q.stream = rng::Stream::of(params_.seed, rng::kDomainConfirm, b.uid, 0x5ed);
        q.counter = b.confirm_probes;
        const auto re = env_.expand_one(q);
        if (re) {
          b.confirm_probes += 1;
          rederive_ok =
              env_.answer_of(re->payload) == env_.answer_of(leaf.step_payload);
        }
      }
    }
    decision = promotion::dual_gate(v_after, c_path.value, {params_.tau_v, tau_c},
                                    true, rederive_required, rederive_ok);
  }

  if (log_) {
    PromotionEvent e;
    e.branch_id = b.uid;
    e.gate = promotion::gate_name(decision.gate);
    e.accepted = decision.accepted;
    e.reason = promotion::reason_name(decision.reason);
    e.v_score = v_after;
    e.c_path = decision.c_path;
    log_->promotion(e);
  }
  if (!decision.accepted) {
    result.false_promotions += 1;
    return false;
  }
  result.outcome = RaceResult::Outcome::kPromoted;
  result.promoted_branch = b.uid;
  result.promoted_node = best.node_id;
  result.promoted_value = v_after;
  return true;
}

RaceResult Race::run(std::span<const NodeId> pool, const PromotionBar& bar) {
  // Merge near-duplicate laterals before rung 0 (lowest id wins).
  std::vector<NodeId> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<BranchState> active;
  std::vector<std::uint64_t> seen;
  for (NodeId uid : sorted) {
    const std::uint64_t sig = dedup_signature(tree_, uid);
    if (std::find(seen.begin(), seen.end(), sig) != seen.end()) continue;
    seen.push_back(sig);
    active.push_back(admit(uid));
  }
  return race_loop(std::move(active), 0, bar);
}

RaceResult Race::resume(std::vector<BranchState> survivors, int start_rung,
                        const PromotionBar& bar) {
  std::sort(survivors.begin(), survivors.end(),
            [](const BranchState& a, const BranchState& b) { return a.uid < b.uid; });
  return race_loop(std::move(survivors), start_rung, bar);
}

std::vector<Race::TraceRow> Race::trace_branch(NodeId uid, int n_rungs) {
  std::vector<TraceRow> rows;
  BranchState b = admit(uid);
  RaceResult scratch;
  double prev = 0.0;
  for (int r = 0; r < n_rungs; ++r) {
    const std::uint64_t budget = full_budget(r);
    if (!ledger_.can_spend(budget)) break;
    b.rung_spent = 0;
    const ProbeBuffer buf = simulate_branch(b, budget, horizon_at(r), r);
    apply_buffer(b, buf, Charge::kLateralFull, scratch);
    refresh_envelope_point(b, /*append=*/true);
    if (b.env_stat.history.empty()) break;
    const auto& point = b.env_stat.latest();
    TraceRow row;
    row.rung = r;
    row.horizon = point.horizon;
    row.leaf_values = b.beam.values();
    row.raw = point.raw;
    row.smoothed = point.smoothed;
    row.k_star = point.k_star;
    row.delta_smooth = rows.empty() ? 0.0 : point.smoothed - prev;
    prev = point.smoothed;
    rows.push_back(std::move(row));
    if (scratch.solved) break;
  }
  return rows;
}

RaceResult Race::race_loop(std::vector<BranchState> active, int start_rung,
                           const PromotionBar& bar) {
  RaceResult result;
  result.frozen_rung = start_rung;
  if (active.empty()) return result;

  const bool lrsc = params_.policy == RacePolicy::kLrsc;
  int rung = start_rung;

  for (;;) {
    const std::uint64_t planned = planned_rung_cost(active, rung);
    const bool over_stop =
        params_.budget_stop && ledger_.spent() + planned > params_.budget_stop;
    if (!ledger_.can_spend(planned) || over_stop) {
      result.outcome = RaceResult::Outcome::kFrozen;
      result.frozen_survivors = std::move(active);
      result.frozen_rung = rung;
      return result;
    }

    const int h_target = horizon_at(rung);
    for (BranchState& b : active) {
      b.rung_spent = 0;
      b.rung_funding = b.probation ? Funding::kMicro : Funding::kFull;
      b.confirm_recheck_ready = false;
    }

    // --- Funding: speculate in parallel, commit in ascending-id order.
    std::vector<ProbeBuffer> buffers(active.size());
    const int threads = std::max(1, params_.threads);
    auto worker = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        if (active[i].probation) continue;  // probation takes the confirm path
        buffers[i] = simulate_branch(active[i], full_budget(rung), h_target, rung);
      }
    };
    if (threads == 1 || active.size() < 2) {
      worker(0, active.size());
    } else {
      std::vector<std::thread> pool_threads;
      const std::size_t chunk =
          (active.size() + static_cast<std::size_t>(threads) - 1) /
          static_cast<std::size_t>(threads);
      for (int t = 0; t < threads; ++t) {
        const std::size_t lo =
            std::min(active.size(), static_cast<std::size_t>(t) * chunk);
        const std::size_t hi = std::min(active.size(), lo + chunk);
        if (lo < hi) pool_threads.emplace_back(worker, lo, hi);
      }
      for (auto& th : pool_threads) th.join();
    }

    auto current_funding = [&active] {
      std::uint64_t funding = 0;
      for (const BranchState& b : active) funding += b.rung_spent;
      return funding;
    };
    auto finish_rung = [&](RaceResult::Outcome outcome, std::uint64_t funding) {
      result.outcome = outcome;
      result.rungs_executed = rung - start_rung + 1;
      result.rung_spend.push_back(funding);
      result.expansions_spent += funding;
    };

    std::vector<NodeId> pending_promoters;
    bool finished = false;
    for (std::size_t i = 0; i < active.size() && !finished; ++i) {
      BranchState& b = active[i];
      if (b.probation) {
        b.confirm_recheck_ready = confirm_probe(b, Charge::kLateralMicro, result);
      } else {
        apply_buffer(b, buffers[i], Charge::kLateralFull, result);
        refresh_envelope_point(b, /*append=*/true);
      }
      if (result.solved) {
        finish_rung(RaceResult::Outcome::kSolved, current_funding());
        return result;
      }

      // Short-circuit promotion check right after this branch's funding.
      if (lrsc && !b.env_stat.history.empty() && b.last_probe_child >= 0 &&
          b.env_stat.latest().smoothed >= bar.value + params_.delta_promote) {
        if (params_.short_circuit) {
          if (attempt_promotion(b, bar, result)) {
            finish_rung(RaceResult::Outcome::kPromoted, current_funding());
            return result;
          }
          if (result.solved) {
            finish_rung(RaceResult::Outcome::kSolved, current_funding());
            return result;
          }
        } else {
          pending_promoters.push_back(b.uid);
        }
      }
    }

    // Deferred promotions (short-circuit disabled): first confirmed promoter
    // in ascending-id order wins at the rung barrier.
    for (NodeId uid : pending_promoters) {
      auto it = std::find_if(active.begin(), active.end(),
                             [&](const BranchState& x) { return x.uid == uid; });
      if (it == active.end()) continue;
      if (it->env_stat.latest().smoothed < bar.value + params_.delta_promote)
        continue;
      if (attempt_promotion(*it, bar, result)) {
        finish_rung(RaceResult::Outcome::kPromoted, current_funding());
        return result;
      }
      if (result.solved) {
        finish_rung(RaceResult::Outcome::kSolved, current_funding());
        return result;
      }
    }

    const std::uint64_t rung_funding_total = current_funding();

    // --- Barrier. Probation confirmation first: the recomputed standardized
    // forecast must clear the bar stored at admission.
    std::vector<std::pair<NodeId, bool>> confirmations;
    {
      std::vector<BranchState> survivors;
      survivors.reserve(active.size());
      for (BranchState& b : active) {
        if (!b.probation) {
          survivors.push_back(std::move(b));
          continue;
        }
        bool pass = false;
        if (b.confirm_recheck_ready) {
          compute_order_gains(b);
          double z = kNegInf;
          for (std::size_t m = 0; m < b.order_gains.size(); ++m) {
            if (std::isnan(b.order_gains[m])) continue;
            if (m < b.probation_scales.size())
              z = std::max(z, continuation::standardize(b.order_gains[m],
                                                        b.probation_scales[m]));
          }
          pass = z >= b.probation_bar;
        }
        confirmations.emplace_back(b.uid, pass);
        if (pass) {
          b.probation = false;
          b.funding = Funding::kFull;
          survivors.push_back(std::move(b));
        }
      }
      active = std::move(survivors);
    }

    for (BranchState& b : active) compute_order_gains(b);

    std::vector<continuation::RobustScale> scales(params_.orders.size());
    int m_eff = 0;
    for (std::size_t m = 0; m < params_.orders.size(); ++m) {
      std::vector<double> population;
      for (const BranchState& b : active)
        if (!std::isnan(b.order_gains[m])) population.push_back(b.order_gains[m]);
      if (!population.empty()) ++m_eff;
      scales[m] = continuation::robust_scale(population);
    }

    std::vector<std::vector<continuation::RobustScale>> band_scales;
    std::vector<int> band_of(active.size(), 0);
    if (params_.depth_banded && !active.empty()) {
      std::vector<int> uniq;
      for (const BranchState& b : active) uniq.push_back(b.parent_depth);
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      band_scales.assign(uniq.size(), scales);
      for (std::size_t band = 0; band < uniq.size(); ++band) {
        for (std::size_t m = 0; m < params_.orders.size(); ++m) {
          std::vector<double> population;
          for (const BranchState& b : active)
            if (b.parent_depth == uniq[band] && !std::isnan(b.order_gains[m]))
              population.push_back(b.order_gains[m]);
          band_scales[band][m] = continuation::robust_scale(population);
        }
      }
      for (std::size_t i = 0; i < active.size(); ++i)
        band_of[i] = static_cast<int>(
            std::lower_bound(uniq.begin(), uniq.end(), active[i].parent_depth) -
            uniq.begin());
    }

    std::vector<double> z_star(active.size(), 0.0);
    std::vector<NodeId> ids(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      BranchState& b = active[i];
      ids[i] = b.uid;
      if (!lrsc) {
        // SH-only ranks on the raw envelope level.
        b.z_star = b.env_stat.history.empty() ? kNegInf : b.env_stat.latest().raw;
        b.m_star = 0;
        z_star[i] = b.z_star;
        continue;
      }
      const auto& use_scales =
          params_.depth_banded && !band_scales.empty()
              ? band_scales[static_cast<std::size_t>(band_of[i])]
              : scales;
      double best = kNegInf;
      int best_m = 0;
      for (std::size_t m = 0; m < b.order_gains.size(); ++m) {
        if (std::isnan(b.order_gains[m])) continue;
        const double z = continuation::standardize(b.order_gains[m], use_scales[m]);
        if (z > best) {
          best = z;
          best_m = params_.orders[m];
        }
      }
      if (best == kNegInf) {
        best = 0.0;
        best_m = 0;
      }
      b.z_star = best;
      b.m_star = best_m;
      z_star[i] = best;
    }

    // Width-aware bar on the (correlation-adjusted) active width.
    double s_for_bar = std::max<double>(1.0, static_cast<double>(active.size()));
    if (params_.use_effective_width && env_.rho_hat() > 0.0) {
      s_for_bar = std::max(1.0, continuation::effective_width(
                                    s_for_bar,
                                    {env_.rho_hat(), env_.mean_cluster_size()}));
    }
    continuation::BarParams bp = params_.bar_params;
    const int m_size = std::max(1, m_eff);
    if (lrsc && params_.calibrate_tail &&
        bp.family == continuation::BarFamily::kSubGamma) {
      std::vector<double> pooled;
      for (std::size_t i = 0; i < active.size(); ++i) {
        const BranchState& b = active[i];
        const auto& use_scales =
            params_.depth_banded && !band_scales.empty()
                ? band_scales[static_cast<std::size_t>(band_of[i])]
                : scales;
        for (std::size_t m = 0; m < b.order_gains.size(); ++m)
          if (!std::isnan(b.order_gains[m]))
            pooled.push_back(
                continuation::standardize(b.order_gains[m], use_scales[m]));
      }
      const double t_max =
          std::log(std::max(4.0, s_for_bar * m_size / bp.epsilon_r));
      const auto fit = continuation::calibrate_sub_gamma(pooled, t_max);
      bp.nu_r = fit.nu;
      bp.c_r = fit.c;
    }
    const double bar_value = lrsc ? continuation::bar(bp, s_for_bar, m_size) : 0.0;

    const auto top = select_quota(z_star, ids, params_.eta);
    std::vector<std::size_t> overflow;
    if (lrsc && params_.rho > 0.0)
      overflow = select_overflow(z_star, ids, bar_value, top, params_.rho);

    std::vector<bool> keep_full(active.size(), false);
    std::vector<bool> keep_micro(active.size(), false);
    for (std::size_t t : top) keep_full[t] = true;
    for (std::size_t o : overflow) keep_micro[o] = true;

    if (log_) {
      for (std::size_t i = 0; i < active.size(); ++i) {
        const BranchState& b = active[i];
        std::optional<bool> confirmed_flag;
        for (const auto& [uid, pass] : confirmations)
          if (uid == b.uid) confirmed_flag = pass;
        if (lrsc) {
          ContinuationEvent ce;
          ce.branch_id = b.uid;
          ce.rung = rung;
          ce.m_star = b.m_star;
          ce.z_pred = b.z_star;
          ce.bar_value = bar_value;
          ce.family = continuation::bar_family_name(bp.family);
          ce.admitted = b.z_star >= bar_value;
          ce.confirmed = confirmed_flag;
          log_->continuation(ce);
        }
        RungEvent re;
        re.rung = rung;
        re.branch_id = b.uid;
        re.funded_as = b.rung_funding == Funding::kFull ? "FULL" : "MICRO";
        re.budget =
            b.rung_funding == Funding::kFull ? full_budget(rung) : params_.b_micro;
        re.expansions = b.rung_spent;
        re.z = z_star[i];
        re.admitted = keep_full[i] || keep_micro[i];
        re.confirmed = confirmed_flag.value_or(false);
        re.promoted = false;
        log_->rung(re);
      }
    }

    std::vector<BranchState> next;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (keep_full[i]) {
        active[i].funding = Funding::kFull;
        active[i].probation = false;
        next.push_back(std::move(active[i]));
      } else if (keep_micro[i]) {
        active[i].funding = Funding::kMicro;
        active[i].probation = true;
        active[i].probation_bar = bar_value;
        active[i].probation_scales =
            params_.depth_banded && !band_scales.empty()
                ? band_scales[static_cast<std::size_t>(band_of[i])]
                : scales;
        next.push_back(std::move(active[i]));
      }
    }
    std::sort(next.begin(), next.end(), [](const BranchState& a, const BranchState& b) {
      return a.uid < b.uid;
    });

    finish_rung(result.outcome, rung_funding_total);

    if (next.size() <= 1) {
      result.outcome = RaceResult::Outcome::kFrozen;
      if (next.empty()) {
        // Quota reached zero: the still-active branches freeze as survivors.
        std::vector<BranchState> leftovers;
        for (BranchState& b : active)
          if (!b.nodes.empty()) leftovers.push_back(std::move(b));
        result.frozen_survivors = std::move(leftovers);
      } else {
        result.frozen_survivors = std::move(next);
      }
      result.frozen_rung = rung + 1;

      // SH-only promotes at race end by envelope level alone; verification is
      // applied post hoc for the false-promotion metric, not as a gate.
      if (!lrsc) {
        for (BranchState& b : result.frozen_survivors) {
          if (b.env_stat.history.empty()) continue;
          if (b.env_stat.latest().raw >= bar.value + params_.delta_promote) {
            result.proposed_promotions += 1;
            result.outcome = RaceResult::Outcome::kPromoted;
            result.promoted_branch = b.uid;
            result.promoted_node =
                b.beam.leaves.empty() ? b.uid : b.beam.leaves.front().node_id;
            result.promoted_value = b.env_stat.latest().raw;
            if (env_.has_exact_verifier() &&
                !env_.verify(tree_.node(*result.promoted_node).step_payload)) {
              result.false_promotions += 1;
            }
            if (log_) {
              PromotionEvent e;
              e.branch_id = b.uid;
              e.gate = "VERIFIER";
              e.accepted = true;
              e.reason = "PASS";
              e.v_score = result.promoted_value;
              log_->promotion(e);
            }
            break;
          }
        }
      }
      return result;
    }

    // Moved-from husks of culled branches are dropped with `active` here.
    active = std::move(next);
    ++rung;
  }
}

}  // namespace ltot::lrsc
