#include "ltot/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltot::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) {
    const double d = x - m;
    acc += d * d;
  }
  return acc / static_cast<double>(n - 1);
}

double median(std::span<const double> xs) {
  return quantile(xs, 0.5);
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q >= 0.0)) q = 0.0;
  if (!(q <= 1.0)) q = 1.0;

  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());

  const std::size_t n = v.size();
  if (n == 1) return v[0];
  const double idx = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double t = idx - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * t;
}

double mad(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mad: empty input");
  const double med = median(xs);
  std::vector<double> dev;
  dev.reserve(xs.size());
  for (double x : xs) dev.push_back(std::fabs(x - med));
  return median(dev);
}

double iqr(std::span<const double> xs) {
  return quantile(xs, 0.75) - quantile(xs, 0.25);
}

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y,
                            int degree) {
  if (degree < 0) throw std::invalid_argument("polyfit: negative degree");
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("polyfit: size mismatch");
  if (n < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("polyfit: not enough points for degree");

  // Normal equations A c = b with A[i][j] = sum x^(i+j), b[i] = sum y x^i.
  const int dim = degree + 1;
  std::vector<double> pow_sums(2 * degree + 1, 0.0);
  std::vector<double> b(dim, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double p = 1.0;
    for (int i = 0; i <= 2 * degree; ++i) {
      pow_sums[i] += p;
      if (i <= degree) b[i] += y[k] * p;
      p *= x[k];
    }
  }
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a[i][j] = pow_sums[i + j];

  // Gaussian elimination with partial pivoting; the system is tiny (dim <= 4).
  std::vector<double> c(dim, 0.0);
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int r = col + 1; r < dim; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-12)
      throw std::domain_error("polyfit: degenerate design");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < dim; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int cc = col; cc < dim; ++cc) a[r][cc] -= f * a[col][cc];
      b[r] -= f * b[col];
    }
  }
  for (int row = dim - 1; row >= 0; --row) {
    double s = b[row];
    for (int cc = row + 1; cc < dim; ++cc) s -= a[row][cc] * c[cc];
    c[row] = s / a[row][row];
  }
  return c;
}

double polyval(std::span<const double> coeffs, double x) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

double polyderiv(std::span<const double> coeffs, double x) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;)
    v = v * x + static_cast<double>(i) * coeffs[i];
  return v;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("ols: need >= 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit fit;
  if (syy == 0.0) {
    // Zero-variance target: any horizontal line is exact.
    fit.slope = 0.0;
    fit.intercept = my;
    fit.r_squared = 1.0;
    return fit;
  }
  if (sxx == 0.0) {
    fit.slope = 0.0;
    fit.intercept = my;
    fit.r_squared = 0.0;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r_squared = 1.0 - ss_res / syy;
  return fit;
}

}  // namespace ltot::stats
