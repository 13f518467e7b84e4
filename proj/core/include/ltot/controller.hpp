#pragma once

// The top-level search loop: exploit mainlines until the compute-normalized
// progress EWMA plateaus, race the lateral pool, promote or freeze, thaw
// survivors in later exploration phases.

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ltot/environment.hpp"
#include "ltot/eventlog.hpp"
#include "ltot/lrsc.hpp"
#include "ltot/tree.hpp"

namespace ltot::controller {

struct PlateauDetector {
  double ewma_beta = 0.3;
  double tau = 1e-3;        // utility per expansion
  int patience = 3;         // consecutive sub-tau readings before plateau
  double hysteresis = 2e-3; // EWMA needed to resume exploitation

  bool seeded = false;
  double ewma = 0.0;
  int consecutive_low = 0;
  bool plateaued = false;

  // Feeds one progress reading (Delta B_t over its compute cost) and returns
  // the plateau flag after patience/hysteresis rules.
  bool step(double delta_b, double compute_delta);
  void reset();
};

struct FrozenBranch {
  lrsc::BranchState state;
  int revisits = 0;
  int strikes = 0;  // consecutive thaw inspections below the bar
};

struct FrozenGroup {
  std::vector<FrozenBranch> members;
  int rung = 0;  // survivors resume exactly here
};

class FreezeThawCache {
 public:
  void push(FrozenGroup group) { groups_.push_back(std::move(group)); }
  bool empty() const { return groups_.empty(); }
  std::size_t size() const { return groups_.size(); }
  FrozenGroup pop_oldest();
  const std::deque<FrozenGroup>& groups() const { return groups_; }
  bool contains_signature(std::uint64_t sig) const;
  std::uint64_t evictions = 0;

 private:
  std::deque<FrozenGroup> groups_;
};

// Constant-time staleness test at thaw: UCB = Ṽ + kappa_u*sqrt(2 ln(revisits+1)
// / K*) must reach B_t - delta within 3 consecutive inspections or the branch
// is evicted. Returns the number evicted.
int evict(FrozenGroup& group, const PromotionBar& bar, double kappa_u = 1.0);

struct ControllerConfig {
  int beam_w = 2;
  int k_children = 4;
  std::uint64_t budget_cap = 10000;
  double lateral_c_threshold = 0.7;
  double explore_fraction = 0.7;  // share of remaining budget per race
  double delta_admit = 0.1;       // mainline admission margin (B_t - delta)
  BarMode bar_mode = BarMode::kBestSoFar;
  int k_bar = 2;
  double kappa_ucb = 1.0;
  PlateauDetector plateau;
  lrsc::RaceParams race;
  std::uint64_t seed = 1;
};

struct SearchResult {
  bool solved = false;
  Payload answer;
  std::uint64_t total_expansions = 0;
  std::optional<std::uint64_t> time_to_first_verified;  // expansions at first hit
  std::vector<NodeId> promotions;
  int false_promotions = 0;
  int proposed_promotions = 0;
  double final_bar = 0.0;
  std::array<std::uint64_t, 5> per_category{};
  std::vector<PhaseEvent> phase_log;
};

// One problem per invocation. Alternates exploitation and LR-SC exploration
// until a verified solution, the budget cap, or frontier exhaustion.
SearchResult run(Environment& env, const ControllerConfig& cfg, EventLog* log);

// ---------------------------------------------------------------------------
// Shared beam-step machinery (also used by the baselines).

// Top-W frontier nodes by (v desc, id asc).
std::vector<NodeId> select_top_w(const Tree& tree, std::span<const NodeId> frontier,
                                 int w);

struct MainlineBatch {
  struct Item {
    NodeId parent = 0;
    ChildSample sample;
  };
  std::vector<Item> items;          // sampling order
  std::optional<std::size_t> solution_item;
  std::uint64_t spend_at_solution = 0;
  bool out_of_budget = false;
};

// Draws up to k children from each selected node in order, charging one
// expansion per child to `category`. Stops at the first verified solution or
// when the ledger runs dry. Nodes are not created here; the caller decides
// origins after partitioning.
MainlineBatch sample_mainline_children(Tree& tree, Environment& env,
                                       BudgetLedger& ledger,
                                       std::span<const NodeId> selected, int k,
                                       std::uint64_t seed, Charge category);

}  // namespace ltot::controller
