#pragma once

// Comparison policies sharing the controller's environments, ledger, and RNG
// framework so runs pair by seed: vanilla beam ToT, SH-only lateralization,
// SH on mainlines, and the uncapped-mainline growth counter.

#include <cstdint>
#include <span>

#include "ltot/controller.hpp"
#include "ltot/environment.hpp"
#include "ltot/eventlog.hpp"
#include "ltot/lrsc.hpp"
#include "ltot/tree.hpp"

namespace ltot::baselines {

struct BeamTotParams {
  int beam_w = 2;
  int depth_d = 5;
  int k = 4;
  std::uint64_t seed = 1;
};

// Classic beam search: expand the top-W frontier nodes by v, k children each,
// down to depth D. Spends at most D*W*k expansions.
controller::SearchResult beam_tot(Environment& env, const BeamTotParams& params,
                                  BudgetLedger& ledger, EventLog* log);

// Successive halving on the raw mean envelope: same rung budgets as LR-SC but
// no forecasting, no width-aware bar, no confirm, no short-circuit; promotion
// only at race end by envelope level.
lrsc::RaceResult sh_only(std::span<const NodeId> pool, double eta,
                         std::uint64_t b0, Tree& tree, Environment& env,
                         BudgetLedger& ledger, EventLog* log,
                         const lrsc::RaceParams& base, const PromotionBar& bar);

struct ShMainlineParams {
  double eta = 4.0;
  std::uint64_t b0 = 1;
  int k = 4;  // root children entered into the depth race
  std::uint64_t seed = 1;
};

// The same SH schedule applied to depth-racing of the mainline candidates
// (the root's children).
controller::SearchResult sh_mainline(Environment& env,
                                     const ShMainlineParams& params,
                                     BudgetLedger& ledger, EventLog* log);

struct UncappedCount {
  double expected_nodes = 0.0;
  bool subcritical = false;  // a*k <= 1
};

// Expected mainline population at depth D when admission is uncapped:
// (a*k)^D, exponential in depth for a*k > 1.
UncappedCount uncapped_mainline_count(double a_fraction, int k, int depth_d);

// Branching-process simulation of the same growth; returns the mean population
// at depth D over `trials` runs.
double simulate_uncapped_mainline(double a_fraction, int k, int depth_d,
                                  int trials, std::uint64_t seed);

}  // namespace ltot::baselines
