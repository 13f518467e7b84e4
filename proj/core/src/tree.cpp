#include "ltot/tree.hpp"

#include <algorithm>
#include <stdexcept>

#include "ltot/stats.hpp"

namespace ltot {

NodeId Tree::add_root(Payload payload, double v, double c_local, Origin origin) {
  if (!(c_local >= 0.0 && c_local <= 1.0))
    throw std::invalid_argument("add_root: c_local outside [0,1]");
  SearchNode n;
  n.id = nodes_.size();
  n.depth = 0;
  n.step_payload = std::move(payload);
  n.v = v;
  n.c_local = c_local;
  n.origin = origin;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

NodeId Tree::add_child(NodeId parent, Payload payload, double v, double c_local,
                       Origin origin, bool verified_solution) {
  if (!contains(parent)) throw std::invalid_argument("add_child: unknown parent id");
  if (!(c_local >= 0.0 && c_local <= 1.0))
    throw std::invalid_argument("add_child: c_local outside [0,1]");
  SearchNode n;
  n.id = nodes_.size();
  n.parent = parent;
  n.depth = nodes_[parent].depth + 1;
  n.step_payload = std::move(payload);
  n.v = v;
  n.c_local = c_local;
  n.origin = origin;
  n.verified_solution = verified_solution;
  nodes_.push_back(std::move(n));
  nodes_[parent].child_count += 1;
  return nodes_.back().id;
}

const SearchNode& Tree::node(NodeId id) const {
  if (!contains(id)) throw std::invalid_argument("node: unknown id");
  return nodes_[id];
}

SearchNode& Tree::node_mut(NodeId id) {
  if (!contains(id)) throw std::invalid_argument("node_mut: unknown id");
  return nodes_[id];
}

std::vector<Payload> Tree::payload_path(NodeId id) const {
  std::vector<Payload> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent)
    path.push_back(node(*cur).step_payload);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<double> Tree::c_local_path(NodeId id) const {
  std::vector<double> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent)
    path.push_back(node(*cur).c_local);
  std::reverse(path.begin(), path.end());
  return path;
}

std::uint64_t BudgetLedger::spent() const {
  std::uint64_t s = 0;
  for (std::uint64_t c : per_category_) s += c;
  return s;
}

void BudgetLedger::charge(Charge c, std::uint64_t n) {
  if (!can_spend(n)) throw std::logic_error("BudgetLedger: charge exceeds cap");
  per_category_[static_cast<int>(c)] += n;
}

void PromotionBar::update(std::span<const double> new_mainline_values) {
  if (new_mainline_values.empty()) return;  // no-op
  if (mode == BarMode::kBestSoFar) {
    for (double v : new_mainline_values) value = std::max(value, v);
    return;
  }
  for (double v : new_mainline_values) {
    auto it = std::lower_bound(top_values_.begin(), top_values_.end(), v,
                               std::greater<double>());
    top_values_.insert(it, v);
  }
  if (top_values_.size() > static_cast<std::size_t>(k_bar))
    top_values_.resize(static_cast<std::size_t>(k_bar));
  value = stats::mean(top_values_);
}

Partition partition_children(std::span<const ChildScore> children,
                             const PromotionBar& bar, double lateral_c_threshold) {
  Partition p;
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (children[i].v >= bar.value - bar.delta) {
      p.mainline.push_back(i);
    } else if (children[i].c_local >= lateral_c_threshold) {
      p.lateral.push_back(i);
    } else {
      p.discard.push_back(i);
    }
  }
  return p;
}

}  // namespace ltot
