#pragma once

// JSON-lines event log. One record per node creation plus per-rung, per-decision,
// per-envelope-update, per-promotion and per-phase rows. Key order and float
// formatting are deterministic so identical runs serialize byte-identically.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltot/tree.hpp"

namespace ltot {

struct NodeEvent {
  NodeId node_id = 0;
  std::optional<NodeId> parent_id;
  int depth = 0;
  Origin origin = Origin::kMainline;
  double v = 0.0;
  double c_local = 0.0;
  Charge ledger_category = Charge::kMainline;
};

struct EnvelopeEvent {
  std::uint64_t branch_id = 0;
  int h = 0;
  std::uint64_t c = 0;
  double v_raw = 0.0;
  double v_smooth = 0.0;
  double k_star = 1.0;
};

struct ContinuationEvent {
  std::uint64_t branch_id = 0;
  int rung = 0;
  int m_star = 0;
  double z_pred = 0.0;
  double bar_value = 0.0;
  std::string family;
  bool admitted = false;
  std::optional<bool> confirmed;
};

struct RungEvent {
  int rung = 0;
  std::uint64_t branch_id = 0;
  std::string funded_as;  // FULL | MICRO
  std::uint64_t budget = 0;
  std::uint64_t expansions = 0;
  double z = 0.0;
  bool admitted = false;
  bool confirmed = false;
  bool promoted = false;
};

struct PromotionEvent {
  std::uint64_t branch_id = 0;
  std::string gate;  // VERIFIER | DUAL
  bool accepted = false;
  std::string reason;
  double v_score = 0.0;
  double c_path = 0.0;
};

struct PhaseEvent {
  std::string phase;  // EXPLOIT | EXPLORE
  std::uint64_t start_expansions = 0;
  std::uint64_t end_expansions = 0;
  double b_t_before = 0.0;
  double b_t_after = 0.0;
  std::string outcome;
};

class EventLog {
 public:
  void set_run_header(const std::string& policy, const std::string& env,
                      std::uint64_t n0, std::uint64_t seed);

  void node(const NodeEvent& e);
  void envelope(const EnvelopeEvent& e);
  void continuation(const ContinuationEvent& e);
  void rung(const RungEvent& e);
  void promotion(const PromotionEvent& e);
  void phase(const PhaseEvent& e);

  const std::vector<std::string>& lines() const { return lines_; }
  std::string dump() const;
  void write_file(const std::string& path) const;

  // Typed copies kept for in-process metrics.
  const std::vector<NodeEvent>& node_events() const { return node_events_; }
  const std::vector<RungEvent>& rung_events() const { return rung_events_; }
  const std::vector<ContinuationEvent>& continuation_events() const {
    return continuation_events_;
  }
  const std::vector<PromotionEvent>& promotion_events() const {
    return promotion_events_;
  }
  const std::vector<PhaseEvent>& phase_events() const { return phase_events_; }

 private:
  std::vector<std::string> lines_;
  std::vector<NodeEvent> node_events_;
  std::vector<RungEvent> rung_events_;
  std::vector<ContinuationEvent> continuation_events_;
  std::vector<PromotionEvent> promotion_events_;
  std::vector<PhaseEvent> phase_events_;
};

}  // namespace ltot
