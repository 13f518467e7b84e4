#pragma once

// Local step-consistency scoring and robust path-consistency aggregation.

#include <optional>
#include <span>

namespace ltot::consistency {

// Component weights for the local consistency score. A missing component is
// signalled by passing std::nullopt for its score; the remaining weights are
// reweighted proportionally.
struct ConsistencyWeights {
  double lambda_logic = 0.5;
  double lambda_syntax = 0.3;
  double lambda_constraints = 0.2;
};

// Weighted sum over the available components, reweighted to sum to 1.
// Throws std::invalid_argument when all components are unavailable or any
// supplied score is outside [0,1].
double local_consistency(std::optional<double> s_logic,
                         std::optional<double> s_syntax,
                         std::optional<double> s_constraints,
                         const ConsistencyWeights& weights);

struct PathConsistency {
  double value = 0.0;
  double quantile_q = 0.25;
  int n_steps = 0;
};

// C_path = min(Quantile_q(c_locals), mean(c_locals)), with the quantile taken
// by linear interpolation at position q*(n-1). Throws on an empty sequence.
PathConsistency path_consistency(std::span<const double> c_locals, double q = 0.25);

// mean - 1.4826*MAD alternative aggregator, clamped to [0,1].
PathConsistency path_consistency_mean_mad(std::span<const double> c_locals);

struct TightenResult {
  double tau_c = 0.0;
  bool rederivation_required = false;
};

// Raises the path-consistency threshold by +0.1 (clamped to 1) and requires
// one-step re-derivation exactly when the logic component dominates
// (lambda_logic >= 0.7) or the syntax/constraint components are unavailable.
TightenResult tighten_for_lm_only(const ConsistencyWeights& weights, double tau_c,
                                  bool syntax_available = true,
                                  bool constraints_available = true);

}  // namespace ltot::consistency
