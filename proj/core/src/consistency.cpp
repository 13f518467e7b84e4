#include "ltot/consistency.hpp"

#include <algorithm>
#include <stdexcept>

#include "ltot/stats.hpp"

namespace ltot::consistency {

namespace {

void check_score(const std::optional<double>& s, const char* name) {
  if (s && !(*s >= 0.0 && *s <= 1.0))
    throw std::invalid_argument(std::string("local_consistency: ") + name +
                                " outside [0,1]");
}

}  // namespace

double local_consistency(std::optional<double> s_logic,
                         std::optional<double> s_syntax,
                         std::optional<double> s_constraints,
                         const ConsistencyWeights& weights) {
  check_score(s_logic, "s_logic");
  check_score(s_syntax, "s_syntax");
  check_score(s_constraints, "s_constraints");

  double weight_sum = 0.0;
  double acc = 0.0;
  if (s_logic) {
    weight_sum += weights.lambda_logic;
    acc += weights.lambda_logic * *s_logic;
  }
  if (s_syntax) {
    weight_sum += weights.lambda_syntax;
    acc += weights.lambda_syntax * *s_syntax;
  }
  if (s_constraints) {
    weight_sum += weights.lambda_constraints;
    acc += weights.lambda_constraints * *s_constraints;
  }
  if (weight_sum <= 0.0)
    throw std::invalid_argument("local_consistency: no component available");
  return acc / weight_sum;
}

PathConsistency path_consistency(std::span<const double> c_locals, double q) {
  if (c_locals.empty())
    throw std::invalid_argument("path_consistency: empty sequence");
  for (double c : c_locals)
    if (!(c >= 0.0 && c <= 1.0))
      throw std::invalid_argument("path_consistency: value outside [0,1]");
  PathConsistency out;
  out.quantile_q = q;
  out.n_steps = static_cast<int>(c_locals.size());
  out.value = std::min(stats::quantile(c_locals, q), stats::mean(c_locals));
  return out;
}

PathConsistency path_consistency_mean_mad(std::span<const double> c_locals) {
  if (c_locals.empty())
    throw std::invalid_argument("path_consistency_mean_mad: empty sequence");
  PathConsistency out;
  out.quantile_q = -1.0;  // not quantile-based
  out.n_steps = static_cast<int>(c_locals.size());
  const double v = stats::mean(c_locals) - 1.4826 * stats::mad(c_locals);
  out.value = std::clamp(v, 0.0, 1.0);
  return out;
}

TightenResult tighten_for_lm_only(const ConsistencyWeights& weights, double tau_c,
                                  bool syntax_available, bool constraints_available) {
  if (!(tau_c >= 0.0 && tau_c <= 1.0))
    throw std::invalid_argument("tighten_for_lm_only: tau_c outside [0,1]");
  TightenResult out;
  const bool lm_only = weights.lambda_logic >= 0.7 ||
                       (!syntax_available && !constraints_available);
  if (lm_only) {
    out.tau_c = std::min(1.0, tau_c + 0.1);
    out.rederivation_required = true;
  } else {
    out.tau_c = tau_c;
    out.rederivation_required = false;
  }
  return out;
}

}  // namespace ltot::consistency
