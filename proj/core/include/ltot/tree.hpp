#pragma once

// Rooted tree of partial traces, the mainline/lateral frontier split, the
// budget ledger, and the mainline acceptance bar.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ltot {

using NodeId = std::uint64_t;

// Environment-defined step token sequence, treated as opaque by the search.
using Payload = std::string;

enum class Origin { kMainline, kLateral };

inline const char* origin_name(Origin o) {
  return o == Origin::kMainline ? "MAINLINE_ORIGIN" : "LATERAL_ORIGIN";
}

struct SearchNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  int depth = 0;
  Payload step_payload;
  double v = 0.0;
  double c_local = 1.0;
  Origin origin = Origin::kMainline;  // immutable after creation
  bool verified_solution = false;     // exact-verifier hit recorded at creation
  int child_count = 0;                // expansions taken from this node so far
};

// Node ids are assigned in creation order; all tie-breaks elsewhere use
// ascending id so runs are deterministic.
class Tree {
 public:
  NodeId add_root(Payload payload, double v, double c_local,
                  Origin origin = Origin::kMainline);

  // Throws std::invalid_argument on unknown parent or c_local outside [0,1].
  NodeId add_child(NodeId parent, Payload payload, double v, double c_local,
                   Origin origin, bool verified_solution = false);

  const SearchNode& node(NodeId id) const;
  SearchNode& node_mut(NodeId id);
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return id < nodes_.size(); }

  // Payload sequence from the root down to `id`.
  std::vector<Payload> payload_path(NodeId id) const;
  // c_local values from the root down to `id` (root included).
  std::vector<double> c_local_path(NodeId id) const;

 private:
  std::vector<SearchNode> nodes_;
};

// ---------------------------------------------------------------------------
// Budget ledger

enum class Charge : int {
  kMainline = 0,
  kLateralFull = 1,
  kLateralMicro = 2,
  kConfirm = 3,
  kPromotionCheck = 4,
};

inline const char* charge_name(Charge c) {
  switch (c) {
    case Charge::kMainline: return "mainline";
    case Charge::kLateralFull: return "lateral_full";
    case Charge::kLateralMicro: return "lateral_micro";
    case Charge::kConfirm: return "confirm";
    case Charge::kPromotionCheck: return "promotion_check";
  }
  return "?";
}

enum class BudgetUnit { kExpansions, kTokens };

// Every environment expansion increments exactly one category; spent is the
// category sum by construction and never exceeds the cap.
class BudgetLedger {
 public:
  explicit BudgetLedger(std::uint64_t cap, BudgetUnit unit = BudgetUnit::kExpansions)
      : cap_(cap), unit_(unit) {}

  std::uint64_t cap() const { return cap_; }
  BudgetUnit unit() const { return unit_; }
  std::uint64_t spent() const;
  std::uint64_t remaining() const { return cap_ - spent(); }
  bool can_spend(std::uint64_t n) const { return spent() + n <= cap_; }
  std::uint64_t category(Charge c) const {
    return per_category_[static_cast<int>(c)];
  }

  // Throws std::logic_error if the charge would exceed the cap; callers are
  // expected to check can_spend first.
  void charge(Charge c, std::uint64_t n = 1);

 private:
  std::uint64_t cap_;
  BudgetUnit unit_;
  std::array<std::uint64_t, 5> per_category_{};
};

// ---------------------------------------------------------------------------
// Mainline acceptance bar

enum class BarMode { kBestSoFar, kTopKMean };

struct PromotionBar {
  double value = 0.0;
  double delta = 0.1;
  BarMode mode = BarMode::kBestSoFar;
  int k_bar = 2;

  // Empty input is a no-op. BEST_SO_FAR keeps the bar monotone; TOP_K_MEAN
  // tracks the mean of the k_bar best values seen so far.
  void update(std::span<const double> new_mainline_values);

 private:
  std::vector<double> top_values_;  // TOP_K_MEAN history, sorted descending
};

// ---------------------------------------------------------------------------
// Frontier partition

struct Partition {
  std::vector<std::size_t> mainline;  // indices into the input span
  std::vector<std::size_t> lateral;
  std::vector<std::size_t> discard;
};

struct ChildScore {
  double v = 0.0;
  double c_local = 0.0;
};

// Children with v >= B_t - delta are mainline admits; below that, children
// with c_local >= lateral_c_threshold enter the lateral pool; the rest are
// discarded. Total: the three sets partition the input.
Partition partition_children(std::span<const ChildScore> children,
                             const PromotionBar& bar, double lateral_c_threshold);

struct Frontier {
  std::vector<NodeId> mainline_set;
  std::vector<NodeId> lateral_pool;
  PromotionBar bar;
};

}  // namespace ltot
