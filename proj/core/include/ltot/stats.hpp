#pragma once

// Small statistics helpers shared across modules: order statistics with the
// q*(n-1) interpolation convention, MAD-based robust scale, polynomial least
// squares, and simple OLS with R^2.

#include <cstddef>
#include <span>
#include <vector>

namespace ltot::stats {

double mean(std::span<const double> xs);

// Sample variance (n-1 denominator); 0 for n < 2.
double variance(std::span<const double> xs);

double median(std::span<const double> xs);

// Linearly-interpolated empirical quantile at index q*(n-1), q clamped to [0,1].
double quantile(std::span<const double> xs, double q);

// Median absolute deviation about the median (unscaled).
double mad(std::span<const double> xs);

// Interquartile range under the same interpolation convention.
double iqr(std::span<const double> xs);

// Least-squares polynomial fit of degree `degree` to (x, y); returns
// coefficients c0..c_degree (value = sum c_j x^j). Throws std::invalid_argument
// on insufficient points and std::domain_error on a degenerate design
// (e.g. repeated x for degree >= 1).
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y,
                            int degree);

double polyval(std::span<const double> coeffs, double x);

// Derivative of the fitted polynomial evaluated at x.
double polyderiv(std::span<const double> coeffs, double x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;  // defined as 1 for a zero-variance target
};

// Ordinary least squares y = slope*x + intercept with R^2.
LinearFit ols(std::span<const double> x, std::span<const double> y);

}  // namespace ltot::stats
