#pragma once

// Synthetic environments: the horizon-bias evaluator model, delayed-payoff and
// planted-riser race pools, heavy-tailed/correlated noise, scripted envelope
// fixtures, and Game of 24 with its exact verifier.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ltot/environment.hpp"
#include "ltot/game24.hpp"
#include "ltot/noise.hpp"
#include "ltot/tree.hpp"

namespace ltot::envs {

// ---------------------------------------------------------------------------
// Horizon-bias evaluator model: observed v = mu - lambda_bias * Delta + eps,
// with Delta decrementing by one per expansion until payoff.

struct HorizonBiasModel {
  double mu = 0.9;
  double lambda_bias = 0.1;
  int delta_remaining = 4;
  NoiseModel noise{NoiseFamily::kGaussian, 0.05};
};

inline double horizon_bias_mean(const HorizonBiasModel& m) {
  return m.mu - m.lambda_bias * static_cast<double>(m.delta_remaining);
}

struct HorizonBiasSpec {
  double lambda_bias = 0.1;
  int planted_delta = 4;       // steps-to-payoff of the planted branch
  double mu_planted = 0.9;
  double mu_mainline = 0.6;
  double mu_junk = 0.3;
  double c_consistent = 0.85;  // consistency means, clamped-normal spread 0.1
  double c_inconsistent = 0.45;
  double c_spread = 0.1;
  NoiseModel noise{NoiseFamily::kGaussian, 0.05};
  std::uint64_t seed = 1;
};

// Controller-level environment. Child slot 0 continues the parent's type;
// slot 1 under the root plants the delayed branch; remaining slots are
// inconsistent junk. A planted node that reaches Delta = 0 is the verified
// solution.
class HorizonBiasEnv : public Environment {
 public:
  explicit HorizonBiasEnv(HorizonBiasSpec spec) : spec_(spec) {}

  std::string name() const override { return "horizon_bias"; }
  ChildSample root() const override;
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override;
  bool has_exact_verifier() const override { return true; }
  bool verify(const Payload& payload) const override;

 private:
  HorizonBiasSpec spec_;
};

// ---------------------------------------------------------------------------
// Race-level synthetic pools: one value profile per lateral branch.

struct BranchProfile {
  double base = 0.5;         // leaf value at the branch root
  double drift = 0.0;        // per-depth slope before takeoff
  int takeoff_horizon = -1;  // H*; < 0 means never
  double post_slope = 0.0;   // per-depth slope beyond H* (first order)
  double post_quad = 0.0;    // per-depth^2 term beyond H* (second order)
  int solution_depth = -1;   // verified solution at this branch depth; < 0 none
  double c_mean = 0.85;
  int cluster = 0;
};

// Delayed-payoff branch: flat (or drifting) until H*, then a ramp whose m-th
// discrete derivative per compute is >= gamma.
BranchProfile delayed_profile(double base, int h_star, double gamma, int order_m);

struct SyntheticSpec {
  NoiseModel noise{NoiseFamily::kGaussian, 0.02};
  double rho = 0.0;               // within-cluster correlation of leaf noise
  double c_spread = 0.1;
  double drift_amplitude = 0.0;   // rung-indexed noise-scale modulation
  bool use_exact_verifier = true; // false: promotion goes through the dual gate
  bool lm_only = false;           // consistency from step-checks alone
  std::uint64_t seed = 1;
  std::vector<BranchProfile> profiles;  // one per branch slot
};

// Branch roots carry payload "L<slot>"; children extend it with ":<index>".
// Leaf values are the profile's clean curve at the branch depth plus
// (sqrt(rho) * cluster latent + sqrt(1-rho) * idiosyncratic) noise.
class SyntheticRaceEnv : public Environment {
 public:
  explicit SyntheticRaceEnv(SyntheticSpec spec);

  std::string name() const override { return "synthetic"; }
  ChildSample root() const override;
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override;
  bool has_exact_verifier() const override { return spec_.use_exact_verifier; }
  bool verify(const Payload& payload) const override;
  bool lm_only_consistency() const override { return spec_.lm_only; }
  // Stable per (slot, depth) for consistent profiles; lineage-dependent for
  // inconsistent ones, so their re-derivations disagree.
  Payload answer_of(const Payload& payload) const override;
  double rho_hat() const override { return spec_.rho; }
  double mean_cluster_size() const override;

  // Creates the branch-root nodes for a race pool under `root_id`, one per
  // profile slot, and returns their ids.
  std::vector<NodeId> make_pool(Tree& tree, NodeId root_id);

  double clean_value(int slot, int branch_depth) const;
  const SyntheticSpec& spec() const { return spec_; }

 private:
  double leaf_value(int slot, int branch_depth, const ExpandQuery& q) const;
  SyntheticSpec spec_;
};

// Profile builders for the standard study pools.
std::vector<BranchProfile> null_pool(int n, double base = 0.5);
std::vector<BranchProfile> declining_null_pool(int n, double base, double drift);
std::vector<BranchProfile> clustered_null_pool(int n, int n_clusters, double base = 0.5);

// ---------------------------------------------------------------------------
// Planted-path controller environment: no child clears the lateral gate, so
// the controller degenerates to beam search. Child slot 0 of the planted
// lineage improves steadily and reaches a verified solution at `solution_depth`
// (< 0 for none).

struct PlantedPathSpec {
  double base = 0.4;
  double gain_per_depth = 0.05;
  double slot_penalty = 0.08;
  int solution_depth = 5;
  double c_local = 0.3;  // below the lateral admission threshold
  NoiseModel noise{NoiseFamily::kGaussian, 0.01};
  std::uint64_t seed = 1;
};

class PlantedPathEnv : public Environment {
 public:
  explicit PlantedPathEnv(PlantedPathSpec spec) : spec_(spec) {}

  std::string name() const override { return "planted_path"; }
  ChildSample root() const override;
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override;
  bool has_exact_verifier() const override { return true; }
  bool verify(const Payload& payload) const override;

 private:
  PlantedPathSpec spec_;
};

// ---------------------------------------------------------------------------
// Game of 24

struct Game24Spec {
  game24::Instance instance;
  std::uint64_t seed = 1;
};

class Game24Env : public Environment {
 public:
  explicit Game24Env(Game24Spec spec) : spec_(spec) {}

  std::string name() const override { return "game24"; }
  ChildSample root() const override;
  // Children are the legal one-operation successors ranked by heuristic; the
  // query's child_index walks that ranking. Terminal or exhausted states
  // return nullopt.
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override;
  bool has_exact_verifier() const override { return true; }
  bool verify(const Payload& payload) const override;

 private:
  Game24Spec spec_;
};

// ---------------------------------------------------------------------------
// Scripted envelope fixtures (failure-mode archetypes).

enum class Archetype {
  kLateInflection,
  kStaircaseSpike,
  kZigZagNoise,
  kEarlyBloomLateFade,
};

const char* archetype_name(Archetype a);

struct FixtureSpec {
  Archetype archetype = Archetype::kLateInflection;
  double base = 0.4;
  double noise_scale = 0.02;
  int t0 = 3;          // inflection / spike onset (branch depth)
  std::uint64_t seed = 1;
};

// One scripted branch (slot 0) plus flat null branches. The staircase spike
// appears only on the first child drawn at depth t0, so a re-measurement
// cannot reproduce it; the other archetypes are persistent curves.
class FixtureEnv : public Environment {
 public:
  explicit FixtureEnv(FixtureSpec spec) : spec_(spec) {}

  std::string name() const override { return "fixture"; }
  ChildSample root() const override;
  std::optional<ChildSample> expand_one(const ExpandQuery& q) override;
  bool has_exact_verifier() const override { return true; }
  // The archetype branch never verifies; a bloom that fades is a wrong answer.
  bool verify(const Payload&) const override { return false; }

  double clean_value(int slot, int branch_depth, int child_index) const;
  std::vector<NodeId> make_pool(Tree& tree, NodeId root_id, int n_null);

 private:
  FixtureSpec spec_;
};

}  // namespace ltot::envs
