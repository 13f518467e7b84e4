#pragma once

// Pluggable expander/evaluator interface. Environments are pure given explicit
// randomization streams: the same query always yields the same child, so
// probes can run speculatively in parallel and be committed in canonical order.

#include <cstdint>
#include <optional>
#include <string>

#include "ltot/rng.hpp"
#include "ltot/tree.hpp"

namespace ltot {

struct ChildSample {
  Payload payload;
  double v = 0.0;
  double c_local = 1.0;
  bool verified_solution = false;  // exact-verifier hit, known at creation
};

struct ExpandQuery {
  const Payload* parent_payload = nullptr;
  std::uint64_t branch_uid = 0;  // race-branch root id; 0 for mainline work
  int depth = 0;                 // absolute depth of the parent
  int branch_depth = 0;          // parent depth below the branch root
  int child_index = 0;           // children already drawn from this parent
  int rung = -1;                 // -1 outside a race
  rng::Stream stream;            // randomization stream for this probe
  std::uint64_t counter = 0;     // draw counter within the stream
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;

  // The problem root. v/c_local seed the frontier and the acceptance bar.
  virtual ChildSample root() const = 0;

  // Produces one child of the queried node, or nullopt when the node cannot
  // be expanded further (terminal state or enumeration exhausted). One call
  // returning a child costs exactly one expansion; the caller charges it.
  virtual std::optional<ChildSample> expand_one(const ExpandQuery& q) = 0;

  virtual bool has_exact_verifier() const { return false; }

  // Exact verification of a candidate payload. The caller charges the call to
  // the promotion_check category.
  virtual bool verify(const Payload& payload) const { return false; }

  // True when the environment's consistency signal comes from step-checks
  // alone (no syntax/constraint components), which tightens the dual gate.
  virtual bool lm_only_consistency() const { return false; }

  // Final-answer view of a trace payload. One-step re-derivation passes when
  // a fresh derivation of the final step agrees on this view.
  virtual Payload answer_of(const Payload& payload) const { return payload; }

  // Within-cluster gain correlation, when the environment plants any.
  virtual double rho_hat() const { return 0.0; }
  virtual double mean_cluster_size() const { return 1.0; }
};

// Counts every child produced; used by the ledger-conservation property test.
class CountingEnvironment : public Environment {
 public:
  explicit CountingEnvironment(Environment& inner) : inner_(inner) {}

  std::string name() const override { return inner_.name(); }
  ChildSample root() const override { return inner_.root(); }
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override {
    auto child = inner_.expand_one(q);
    if (child) ++expansions_;
    return child;
  }
  bool has_exact_verifier() const override { return inner_.has_exact_verifier(); }
  bool verify(const Payload& p) const override { return inner_.verify(p); }
  bool lm_only_consistency() const override { return inner_.lm_only_consistency(); }
  Payload answer_of(const Payload& p) const override { return inner_.answer_of(p); }
  double rho_hat() const override { return inner_.rho_hat(); }
  double mean_cluster_size() const override { return inner_.mean_cluster_size(); }

  std::uint64_t expansions() const { return expansions_; }

 private:
  Environment& inner_;
  std::uint64_t expansions_ = 0;
};

}  // namespace ltot
