#pragma once

// Lateral Racing with Short-Circuit: the rung loop with quota culling,
// width-aware overflow micro-probes, repeat-to-confirm, short-circuit
// promotion, and survivor freezing.
//
// Rung r funds every active branch: full members get b0*eta^r, probation
// (overflow) members get the b_micro confirmation probe. Selection for the
// next rung happens at the rung barrier, so strict-mode rung cost is exactly
// N0*b0 and overflow adds at most the rho fraction on top.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ltot/continuation.hpp"
#include "ltot/envelope.hpp"
#include "ltot/environment.hpp"
#include "ltot/eventlog.hpp"
#include "ltot/tree.hpp"

namespace ltot::lrsc {

enum class RacePolicy { kLrsc, kShOnly };

struct RaceParams {
  RacePolicy policy = RacePolicy::kLrsc;
  double eta = 4.0;
  std::uint64_t b0 = 1;
  std::uint64_t b_micro = 1;
  double rho = 0.15;  // overflow cap fraction of |S_r|
  int m_mu = 3;
  double alpha_smooth = 0.5;
  int window = 4;
  std::vector<int> orders{1, 2};
  continuation::BarParams bar_params;
  bool calibrate_tail = false;  // fit sub-Gamma (nu, c) per rung from the z population
  bool short_circuit = true;
  bool depth_banded = false;  // standardize within parent-depth bands
  bool use_effective_width = true;
  envelope::Aggregator aggregator = envelope::Aggregator::kTopK;
  envelope::WeightedEnvelopeSpec weighted_spec;
  std::vector<int> horizon_schedule;  // explicit horizons per rung; empty = 1,2,4,...
  int threads = 1;                    // intra-rung probe parallelism
  double delta_promote = 0.1;         // promotion margin over B_t
  double tau_v = 0.85;
  double tau_c = 0.75;
  std::uint64_t seed = 1;
  std::uint64_t budget_stop = 0;  // absolute ledger-spent ceiling; 0 = ledger cap
};

enum class Funding { kFull, kMicro };

// Branch-local node bookkeeping; self-contained so a rung's probes can run
// speculatively off-tree and be committed in canonical order.
struct LocalNode {
  NodeId id = 0;  // real tree id once committed
  int branch_depth = 0;
  double v = 0.0;
  Payload payload;
  int child_count = 0;
  bool exhausted = false;
};

struct BranchState {
  NodeId uid = 0;  // branch root node id
  Funding funding = Funding::kFull;
  bool probation = false;
  double probation_bar = 0.0;  // admission threshold a confirmation must re-clear
  std::vector<continuation::RobustScale> probation_scales;  // per order
  envelope::Envelope env_stat;
  envelope::MicroBeam beam;
  std::vector<LocalNode> nodes;  // creation order; index 0 is the root
  int horizon = 0;
  std::uint64_t compute = 0;        // expansions charged since admission
  std::uint64_t probes = 0;         // expand-draw counter
  std::uint64_t confirm_probes = 0; // confirm-draw counter
  int last_probe_parent = -1;       // local node indices
  int last_probe_child = -1;
  int parent_depth = 0;  // depth of the branch root in the tree
  std::uint64_t signature = 0;
  bool errored = false;

  // Per-rung transients.
  std::vector<double> order_gains;  // NaN when an order cannot be fitted
  double z_star = 0.0;
  int m_star = 0;
  std::uint64_t rung_spent = 0;
  Funding rung_funding = Funding::kFull;
  bool confirm_recheck_ready = false;
};

struct RaceResult {
  enum class Outcome { kPromoted, kFrozen, kSolved };
  Outcome outcome = Outcome::kFrozen;
  std::optional<NodeId> promoted_branch;
  std::optional<NodeId> promoted_node;  // best leaf joining the mainlines
  double promoted_value = 0.0;          // its smoothed envelope at promotion
  std::vector<BranchState> frozen_survivors;
  int frozen_rung = 0;
  int rungs_executed = 0;
  std::uint64_t expansions_spent = 0;        // lateral funding spend
  std::vector<std::uint64_t> rung_spend;     // funding spend per rung
  bool solved = false;
  std::optional<NodeId> solution_node;
  std::uint64_t spend_at_solution = 0;  // ledger total when first verified
  int proposed_promotions = 0;
  int false_promotions = 0;
};

// Top floor(n/eta) positions by z, ties broken by ascending id.
std::vector<std::size_t> select_quota(std::span<const double> z,
                                      std::span<const NodeId> ids, double eta);

// Positions outside top_set with z >= bar_value, ranked by z (ties ascending
// id), truncated to floor(rho * n).
std::vector<std::size_t> select_overflow(std::span<const double> z,
                                         std::span<const NodeId> ids,
                                         double bar_value,
                                         std::span<const std::size_t> top_set,
                                         double rho);

// Near-duplicate signature of a lateral: hash of the normalized step-payload
// sequence from the tree root down to the branch root.
std::uint64_t dedup_signature(const Tree& tree, NodeId id);

class Race {
 public:
  Race(Tree& tree, Environment& env, BudgetLedger& ledger, EventLog* log,
       RaceParams params);

  // Races a fresh lateral pool from rung 0. Near-duplicates are merged first.
  RaceResult run(std::span<const NodeId> pool, const PromotionBar& bar);

  // Resumes thawed survivors at their cached rung.
  RaceResult resume(std::vector<BranchState> survivors, int start_rung,
                    const PromotionBar& bar);

  struct TraceRow {
    int rung = 0;
    int horizon = 0;
    std::vector<double> leaf_values;  // micro-beam at the rung's end
    double raw = 0.0;
    double smoothed = 0.0;
    double k_star = 0.0;
    double delta_smooth = 0.0;  // vs. the previous row
  };

  // Funds a single branch through rungs 0..n_rungs-1 of the budget schedule
  // and reports its per-horizon envelope table.
  std::vector<TraceRow> trace_branch(NodeId uid, int n_rungs);

 private:
  struct ProbeBuffer;  // speculative rung results

  BranchState admit(NodeId uid);
  RaceResult race_loop(std::vector<BranchState> active, int start_rung,
                       const PromotionBar& bar);
  std::uint64_t planned_rung_cost(std::span<const BranchState> active, int rung) const;
  int horizon_at(int rung) const;
  std::uint64_t full_budget(int rung) const;

  // Probes one branch against its rung budget; pure with respect to the tree
  // and ledger (works on the branch's local node list).
  ProbeBuffer simulate_branch(const BranchState& b, std::uint64_t budget,
                              int h_target, int rung);
  // Replays a buffer onto the canonical state: creates tree nodes, charges the
  // ledger, updates beam/envelope, and stops early at a verified solution.
  void apply_buffer(BranchState& b, const ProbeBuffer& buf, Charge category,
                    RaceResult& result);

  // One fresh re-measurement of the branch's last probe (repeat-to-confirm).
  // Returns false (EXHAUSTED) when no budget or nothing to re-measure.
  bool confirm_probe(BranchState& b, Charge category, RaceResult& result);

  void refresh_envelope_point(BranchState& b, bool append);
  double aggregate(const std::vector<double>& values, double* k_star) const;
  void compute_order_gains(BranchState& b) const;
  bool attempt_promotion(BranchState& b, const PromotionBar& bar,
                         RaceResult& result);

  Tree& tree_;
  Environment& env_;
  BudgetLedger& ledger_;
  EventLog* log_;
  RaceParams params_;
};

}  // namespace ltot::lrsc
