#pragma once

// Per-branch micro-beam maintenance and the smoothed envelope statistic, plus
// the compute-normalized improvement between horizons.

#include <cstdint>
#include <span>
#include <vector>

#include "ltot/tree.hpp"

namespace ltot::envelope {

// Mean of the K largest values (all values when fewer than K). Throws on
// empty input or K < 1.
double top_k_mean(std::span<const double> leaf_values, int k);

// Beta smoothing: (K*·V + alpha) / (K* + 2·alpha). alpha=0 is the identity.
double smooth(double v, double k_star, double alpha);

struct WeightedEnvelopeSpec {
  double omega_max = 0.6;   // per-leaf weight cap, in (0,1]
  double temperature = 0.25;
};

struct WeightedEnvelope {
  double value = 0.0;
  double k_eff = 1.0;  // effective sample size 1/sum(w^2)
};

// Clipped-softmax weighted mean: weights = softmax(values/temperature) clipped
// at omega_max and renormalized. Throws std::domain_error when clipping is
// infeasible (omega_max * n < 1).
WeightedEnvelope weighted_envelope(std::span<const double> leaf_values,
                                   const WeightedEnvelopeSpec& spec);

enum class Aggregator { kTopK, kWeighted, kTrimmedMean, kPowerMean };

// Trimmed mean drops the trim_fraction smallest and largest values (floor of
// n*trim each side). Power mean is the unweighted p-mean.
double trimmed_mean(std::span<const double> values, double trim_fraction);
double power_mean(std::span<const double> values, double p);

struct EnvelopePoint {
  int horizon = 0;
  std::uint64_t compute = 0;  // expansions charged to the branch so far
  double raw = 0.0;           // V
  double smoothed = 0.0;      // Ṽ
  double k_star = 1.0;
};

// Horizon-indexed envelope history; strictly increasing in compute.
struct Envelope {
  std::uint64_t branch_uid = 0;
  double alpha = 0.5;
  std::vector<EnvelopePoint> history;

  void append(int horizon, std::uint64_t compute, double raw, double k_star);
  // Confirm probes re-measure the last point at the same compute.
  void replace_last(double raw, double k_star);
  const EnvelopePoint& latest() const;

  // Compute-normalized improvement g = (Ṽ(h) - Ṽ(h_prev)) / (C(h) - C(h_prev)),
  // using the latest history entry at each horizon. Throws when a horizon is
  // missing or the compute difference is zero.
  double improvement(int h, int h_prev) const;
};

// Top-m_mu leaves at the branch's current horizon, ranked by v descending with
// ties broken by ascending node id.
struct MicroBeam {
  struct Leaf {
    NodeId node_id = 0;
    double v = 0.0;
  };

  int m_mu = 3;
  int horizon = 0;
  std::vector<Leaf> leaves;  // sorted (v desc, id asc), size <= m_mu

  // Starts a fresh beam at a deeper horizon.
  void reset(int new_horizon);
  // Offers a leaf at the current horizon; kept only if it makes the top m_mu.
  void offer(NodeId node_id, double v);
  // Removes a leaf (confirm re-measurement path). No-op if absent.
  void remove(NodeId node_id);

  std::vector<double> values() const;
  bool empty() const { return leaves.empty(); }
};

}  // namespace ltot::envelope
