#pragma once

// Predictive continuation: local polynomial forecasting of envelope gains,
// rung-wise robust standardization, width-aware admission bars for three tail
// families, and the correlation-adjusted effective width.

#include <span>
#include <vector>

#include "ltot/envelope.hpp"

namespace ltot::continuation {

struct ForecastSpec {
  int window = 4;                  // last W points, W in {3,4}
  std::vector<int> orders{1, 2};   // polynomial orders fitted; m=3 is ablation-only
  double next_dc = 1.0;            // compute of the next micro-probe
};

// Least-squares polynomial of degree m fitted to the last `window` history
// points in local coordinates (compute shifted so the last point is the
// origin). Returns the fitted derivative at the next probe's compute midpoint,
// i.e. the forecasted dṼ/dC over the next micro-probe.
// Throws std::invalid_argument when the window holds fewer than m+1 points and
// std::domain_error on a degenerate design.
double fit_forecast(std::span<const envelope::EnvelopePoint> history, int m,
                    int window, double next_dc);

struct RobustScale {
  double center = 0.0;
  double scale = 0.0;  // 0 means "no spread": all z-scores are 0
};

// Median/MAD scale with IQR fallback: scale = 1.4826*MAD, or IQR/1.349 when
// the MAD is zero, or 0 when both vanish. Fewer than 2 scores also yields a
// zero scale (no population to standardize against).
RobustScale robust_scale(std::span<const double> scores);

double standardize(double score, const RobustScale& s);

// z-scores for a whole rung population.
std::vector<double> robust_standardize(std::span<const double> scores);

enum class BarFamily { kSubGaussian, kSubGamma, kSubWeibull };

const char* bar_family_name(BarFamily f);

struct BarParams {
  BarFamily family = BarFamily::kSubGaussian;
  double kappa = 1.0;
  double delta = 0.1;
  // sub-Gamma tail parameters
  double nu_r = 1.0;
  double c_r = 0.0;
  double epsilon_r = 0.05;  // in (0,1]
  // sub-Weibull tail parameters
  double k_r = 1.0;
  double alpha_w = 1.0;
};

// Width-aware admission bar at active width S_size and order-set size M_size:
//   sub-Gaussian: kappa*sqrt(2 ln(S*M)) + delta
//   sub-Gamma:    kappa*(sqrt(2 nu ln(S*M/eps)) + c ln(S*M/eps)) + delta
//   sub-Weibull:  K_r*(ln(2 S*M/eps))^(1/alpha) + delta
double bar(const BarParams& params, double s_size, int m_size);

struct SubGammaFit {
  double nu = 1.0;
  double c = 0.0;
};

// Fits rung-wise sub-Gamma tail parameters to a sample of standardized scores:
// nu from the robust scale, c as the smallest slope making the empirical upper
// quantiles satisfy q(1-e^-t) <= sqrt(2 nu t) + c t over t in [1, t_max].
SubGammaFit calibrate_sub_gamma(std::span<const double> standardized_scores,
                                double t_max);

struct CorrelationModel {
  double rho_hat = 0.0;          // within-cluster gain correlation, in [0,1]
  double mean_cluster_size = 1.0;
};

// Design-effect effective width |S|_eff = S / (1 + (n̄-1)·ρ̂).
double effective_width(double s_size, const CorrelationModel& model);

enum class Decision { kAdmit, kCull };

// Eq.-4 style admission: admit iff the best standardized forecast over the
// fitted orders clears the width-aware bar.
inline Decision decide_continuation(double z_star, double bar_value) {
  return z_star >= bar_value ? Decision::kAdmit : Decision::kCull;
}

}  // namespace ltot::continuation
