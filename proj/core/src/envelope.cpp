#include "ltot/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltot::envelope {

double top_k_mean(std::span<const double> leaf_values, int k) {
  if (leaf_values.empty()) throw std::invalid_argument("top_k_mean: empty input");
  if (k < 1) throw std::invalid_argument("top_k_mean: K < 1");
  std::vector<double> v(leaf_values.begin(), leaf_values.end());
  std::sort(v.begin(), v.end(), std::greater<double>());
  const std::size_t take = std::min<std::size_t>(v.size(), static_cast<std::size_t>(k));
  double s = 0.0;
  for (std::size_t i = 0; i < take; ++i) s += v[i];
  return s / static_cast<double>(take);
}

double smooth(double v, double k_star, double alpha) {
  if (!(k_star > 0.0)) throw std::invalid_argument("smooth: K* must be positive");
  if (alpha < 0.0) throw std::invalid_argument("smooth: alpha must be >= 0");
  return (k_star * v + alpha) / (k_star + 2.0 * alpha);
}

WeightedEnvelope weighted_envelope(std::span<const double> leaf_values,
                                   const WeightedEnvelopeSpec& spec) {
  const std::size_t n = leaf_values.size();
  if (n == 0) throw std::invalid_argument("weighted_envelope: empty input");
  if (!(spec.omega_max > 0.0 && spec.omega_max <= 1.0))
    throw std::invalid_argument("weighted_envelope: omega_max outside (0,1]");
  if (!(spec.temperature > 0.0))
    throw std::invalid_argument("weighted_envelope: temperature must be > 0");
  if (spec.omega_max * static_cast<double>(n) < 1.0)
    throw std::domain_error("weighted_envelope: clipping infeasible");

  // Softmax with max-shift for stability.
  double vmax = leaf_values[0];
  for (double v : leaf_values) vmax = std::max(vmax, v);
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp((leaf_values[i] - vmax) / spec.temperature);
    z += w[i];
  }
  for (double& wi : w) wi /= z;

  // Clip at omega_max and redistribute mass over the unclipped weights until
  // stable (water-filling; terminates in <= n passes).
  std::vector<bool> clipped(n, false);
  for (std::size_t pass = 0; pass < n; ++pass) {
    double over = 0.0;
    double free_mass = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clipped[i] && w[i] > spec.omega_max) {
        over += w[i] - spec.omega_max;
        w[i] = spec.omega_max;
        clipped[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t i = 0; i < n; ++i)
      if (!clipped[i]) free_mass += w[i];
    if (free_mass <= 0.0) {
      // All clipped: weights are uniform at omega_max (feasible by the check).
      for (double& wi : w) wi = 1.0 / static_cast<double>(n);
      break;
    }
    const double scale = (over + free_mass) / free_mass;
    for (std::size_t i = 0; i < n; ++i)
      if (!clipped[i]) w[i] *= scale;
  }

  WeightedEnvelope out;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.value += w[i] * leaf_values[i];
    sum_sq += w[i] * w[i];
  }
  out.k_eff = 1.0 / sum_sq;
  return out;
}

double trimmed_mean(std::span<const double> values, double trim_fraction) {
  if (values.empty()) throw std::invalid_argument("trimmed_mean: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t cut =
      static_cast<std::size_t>(trim_fraction * static_cast<double>(v.size()));
  if (2 * cut >= v.size()) return v[v.size() / 2];
  double s = 0.0;
  for (std::size_t i = cut; i < v.size() - cut; ++i) s += v[i];
  return s / static_cast<double>(v.size() - 2 * cut);
}

double power_mean(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("power_mean: empty input");
  double s = 0.0;
  for (double v : values) s += std::pow(std::max(v, 0.0), p);
  return std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

void Envelope::append(int horizon, std::uint64_t compute, double raw, double k_star) {
  if (!history.empty() && compute <= history.back().compute)
    throw std::logic_error("Envelope: history must be strictly increasing in compute");
  EnvelopePoint p;
  p.horizon = horizon;
  p.compute = compute;
  p.raw = raw;
  p.k_star = k_star;
  p.smoothed = smooth(raw, k_star, alpha);
  history.push_back(p);
}

void Envelope::replace_last(double raw, double k_star) {
  if (history.empty()) throw std::logic_error("Envelope: nothing to replace");
  EnvelopePoint& p = history.back();
  p.raw = raw;
  p.k_star = k_star;
  p.smoothed = smooth(raw, k_star, alpha);
}

const EnvelopePoint& Envelope::latest() const {
  if (history.empty()) throw std::logic_error("Envelope: empty history");
  return history.back();
}

double Envelope::improvement(int h, int h_prev) const {
  const EnvelopePoint* newer = nullptr;
  const EnvelopePoint* older = nullptr;
  for (const auto& p : history) {
    if (p.horizon == h) newer = &p;        // latest entry wins
    if (p.horizon == h_prev) older = &p;
  }
  if (!newer || !older)
    throw std::invalid_argument("improvement: horizon missing from history");
  if (newer->compute == older->compute)
    throw std::domain_error("improvement: equal compute");
  return (newer->smoothed - older->smoothed) /
         (static_cast<double>(newer->compute) - static_cast<double>(older->compute));
}

void MicroBeam::reset(int new_horizon) {
  horizon = new_horizon;
  leaves.clear();
}

void MicroBeam::offer(NodeId node_id, double v) {
  Leaf leaf{node_id, v};
  auto better = [](const Leaf& a, const Leaf& b) {
    if (a.v != b.v) return a.v > b.v;
    return a.node_id < b.node_id;
  };
  auto it = std::lower_bound(leaves.begin(), leaves.end(), leaf, better);
  leaves.insert(it, leaf);
  if (leaves.size() > static_cast<std::size_t>(m_mu)) leaves.pop_back();
}

void MicroBeam::remove(NodeId node_id) {
  for (auto it = leaves.begin(); it != leaves.end(); ++it) {
    if (it->node_id == node_id) {
      leaves.erase(it);
      return;
    }
  }
}

std::vector<double> MicroBeam::values() const {
  std::vector<double> out;
  out.reserve(leaves.size());
  for (const Leaf& l : leaves) out.push_back(l.v);
  return out;
}

}  // namespace ltot::envelope
