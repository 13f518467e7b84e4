#include "ltot/eventlog.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ltot {

namespace {
using json = nlohmann::ordered_json;
}

void EventLog::set_run_header(const std::string& policy, const std::string& env,
                              std::uint64_t n0, std::uint64_t seed) {
  json j;
  j["type"] = "run";
  j["policy"] = policy;
  j["env"] = env;
  j["n0"] = n0;
  j["seed"] = seed;
  lines_.push_back(j.dump());
}

void EventLog::node(const NodeEvent& e) {
  json j;
  j["type"] = "node";
  j["node_id"] = e.node_id;
  if (e.parent_id)
    j["parent_id"] = *e.parent_id;
  else
    j["parent_id"] = nullptr;
  j["depth"] = e.depth;
  j["origin"] = origin_name(e.origin);
  j["v"] = e.v;
  j["c_local"] = e.c_local;
  j["ledger_category"] = charge_name(e.ledger_category);
  lines_.push_back(j.dump());
  node_events_.push_back(e);
}

void EventLog::envelope(const EnvelopeEvent& e) {
  json j;
  j["type"] = "envelope";
  j["branch_id"] = e.branch_id;
  j["h"] = e.h;
  j["c"] = e.c;
  j["v_raw"] = e.v_raw;
  j["v_smooth"] = e.v_smooth;
  j["k_star"] = e.k_star;
  lines_.push_back(j.dump());
}

void EventLog::continuation(const ContinuationEvent& e) {
  json j;
  j["type"] = "continuation";
  j["branch_id"] = e.branch_id;
  j["rung"] = e.rung;
  j["m_star"] = e.m_star;
  j["z_pred"] = e.z_pred;
  j["bar_value"] = e.bar_value;
  j["family"] = e.family;
  j["admitted"] = e.admitted;
  if (e.confirmed)
    j["confirmed"] = *e.confirmed;
  else
    j["confirmed"] = nullptr;
  lines_.push_back(j.dump());
  continuation_events_.push_back(e);
}

void EventLog::rung(const RungEvent& e) {
  json j;
  j["type"] = "rung";
  j["rung"] = e.rung;
  j["branch_id"] = e.branch_id;
  j["funded_as"] = e.funded_as;
  j["budget"] = e.budget;
  j["expansions"] = e.expansions;
  j["z"] = e.z;
  j["admitted"] = e.admitted;
  j["confirmed"] = e.confirmed;
  j["promoted"] = e.promoted;
  lines_.push_back(j.dump());
  rung_events_.push_back(e);
}

void EventLog::promotion(const PromotionEvent& e) {
  json j;
  j["type"] = "promotion";
  j["branch_id"] = e.branch_id;
  j["gate"] = e.gate;
  j["accepted"] = e.accepted;
  j["reason"] = e.reason;
  j["v_score"] = e.v_score;
  j["c_path"] = e.c_path;
  lines_.push_back(j.dump());
  promotion_events_.push_back(e);
}

void EventLog::phase(const PhaseEvent& e) {
  json j;
  j["type"] = "phase";
  j["phase"] = e.phase;
  j["start_expansions"] = e.start_expansions;
  j["end_expansions"] = e.end_expansions;
  j["b_t_before"] = e.b_t_before;
  j["b_t_after"] = e.b_t_after;
  j["outcome"] = e.outcome;
  lines_.push_back(j.dump());
  phase_events_.push_back(e);
}

std::string EventLog::dump() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

void EventLog::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("EventLog: cannot open " + path);
  f << dump();
}

}  // namespace ltot
