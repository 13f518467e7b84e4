#include "ltot/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ltot/stats.hpp"

namespace ltot::continuation {

double fit_forecast(std::span<const envelope::EnvelopePoint> history, int m,
                    int window, double next_dc) {
  if (m < 1) throw std::invalid_argument("fit_forecast: order must be >= 1");
  const std::size_t take =
      std::min<std::size_t>(history.size(), static_cast<std::size_t>(window));
  if (take < static_cast<std::size_t>(m) + 1)
    throw std::invalid_argument("fit_forecast: not enough points for order");

  const auto tail = history.subspan(history.size() - take, take);
  const double origin = static_cast<double>(tail.back().compute);
  std::vector<double> x, y;
  x.reserve(take);
  y.reserve(take);
  for (const auto& p : tail) {
    x.push_back(static_cast<double>(p.compute) - origin);
    y.push_back(p.smoothed);
  }
  const std::vector<double> coeffs = stats::polyfit(x, y, m);
  return stats::polyderiv(coeffs, next_dc / 2.0);
}

RobustScale robust_scale(std::span<const double> scores) {
  RobustScale s;
  if (scores.size() < 2) return s;
  s.center = stats::median(scores);
  const double m = stats::mad(scores);
  if (m > 0.0) {
    s.scale = 1.4826 * m;
    return s;
  }
  const double r = stats::iqr(scores);
  if (r > 0.0) {
    s.scale = r / 1.349;
    return s;
  }
  s.scale = 0.0;
  return s;
}

double standardize(double score, const RobustScale& s) {
  if (s.scale == 0.0) return 0.0;
  return (score - s.center) / s.scale;
}

std::vector<double> robust_standardize(std::span<const double> scores) {
  const RobustScale s = robust_scale(scores);
  std::vector<double> z;
  z.reserve(scores.size());
  for (double v : scores) z.push_back(standardize(v, s));
  return z;
}

const char* bar_family_name(BarFamily f) {
  switch (f) {
    case BarFamily::kSubGaussian: return "sub_gaussian";
    case BarFamily::kSubGamma: return "sub_gamma";
    case BarFamily::kSubWeibull: return "sub_weibull";
  }
  return "?";
}

double bar(const BarParams& p, double s_size, int m_size) {
  if (!(s_size >= 1.0) || m_size < 1)
    throw std::invalid_argument("bar: S_size and M_size must be >= 1");
  const double width = s_size * static_cast<double>(m_size);
  switch (p.family) {
    case BarFamily::kSubGaussian:
      return p.kappa * std::sqrt(2.0 * std::log(width)) + p.delta;
    case BarFamily::kSubGamma: {
      if (!(p.epsilon_r > 0.0 && p.epsilon_r <= 1.0))
        throw std::invalid_argument("bar: epsilon_r outside (0,1]");
      const double l = std::log(width / p.epsilon_r);
      return p.kappa * (std::sqrt(2.0 * p.nu_r * l) + p.c_r * l) + p.delta;
    }
    case BarFamily::kSubWeibull: {
      if (!(p.epsilon_r > 0.0 && p.epsilon_r <= 1.0))
        throw std::invalid_argument("bar: epsilon_r outside (0,1]");
      if (!(p.alpha_w > 0.0))
        throw std::invalid_argument("bar: alpha_w must be > 0");
      const double l = std::log(2.0 * width / p.epsilon_r);
      return p.k_r * std::pow(l, 1.0 / p.alpha_w) + p.delta;
    }
  }
  throw std::logic_error("bar: unknown family");
}

SubGammaFit calibrate_sub_gamma(std::span<const double> standardized_scores,
                                double t_max) {
  SubGammaFit fit;
  if (standardized_scores.size() < 8 || !(t_max > 1.0)) return fit;

  const RobustScale s = robust_scale(standardized_scores);
  fit.nu = s.scale > 0.0 ? s.scale * s.scale : 1.0;

  // Smallest c with q(1 - e^-t) <= sqrt(2 nu t) + c t across the t grid. The
  // top empirical quantile caps at the sample maximum, which is the right
  // conservative behavior for tails heavier than the sample resolves.
  std::vector<double> sorted(standardized_scores.begin(), standardized_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const int grid = 32;
  double c = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = 1.0 + (t_max - 1.0) * static_cast<double>(i) / grid;
    const double q = stats::quantile(sorted, 1.0 - std::exp(-t));
    const double excess = q - std::sqrt(2.0 * fit.nu * t);
    if (excess > 0.0) c = std::max(c, excess / t);
  }
  fit.c = c;
  return fit;
}

double effective_width(double s_size, const CorrelationModel& model) {
  if (!(s_size >= 1.0))
    throw std::invalid_argument("effective_width: S_size must be >= 1");
  if (!(model.rho_hat >= 0.0 && model.rho_hat <= 1.0))
    throw std::invalid_argument("effective_width: rho_hat outside [0,1]");
  if (!(model.mean_cluster_size >= 1.0))
    throw std::invalid_argument("effective_width: mean cluster size must be >= 1");
  const double deff = 1.0 + (model.mean_cluster_size - 1.0) * model.rho_hat;
  return s_size / deff;
}

}  // namespace ltot::continuation
