#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "ltot/noise.hpp"
#include "ltot/rng.hpp"
#include "ltot/stats.hpp"

using namespace ltot;

namespace {

// Independent quantile oracle: full sort plus explicit interpolation, written
// separately from the library path.
double quantile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return v[lo];
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Long-double normal-equations oracle solved by Cramer's rule (degree <= 2).
std::vector<double> polyfit_oracle_deg2(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  long double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double xi = x[i];
    const long double yi = y[i];
    s0 += 1;
    s1 += xi;
    s2 += xi * xi;
    s3 += xi * xi * xi;
    s4 += xi * xi * xi * xi;
    t0 += yi;
    t1 += yi * xi;
    t2 += yi * xi * xi;
  }
  const long double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) +
                          s2 * (s1 * s3 - s2 * s2);
  const long double d0 = t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - s3 * t2) +
                         s2 * (t1 * s3 - s2 * t2);
  const long double d1 = s0 * (t1 * s4 - t2 * s3) - t0 * (s1 * s4 - s3 * s2) +
                         s2 * (s1 * t2 - t1 * s2);
  const long double d2 = s0 * (s2 * t2 - s3 * t1) - s1 * (s1 * t2 - s3 * t0) +
                         t0 * (s1 * s3 - s2 * s2);
  return {static_cast<double>(d0 / det), static_cast<double>(d1 / det),
          static_cast<double>(d2 / det)};
}

}  // namespace

TEST_CASE("quantile matches the sort-based oracle on random data") {
  const rng::Stream s = rng::Stream::of(7, rng::kDomainSim);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng::bits(s, trial, 0) % 40;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(rng::uniform(s, 1000 * trial + i));
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      CHECK(stats::quantile(v, q) ==
            doctest::Approx(quantile_oracle(v, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("polyfit matches the closed-form normal-equations oracle") {
  const rng::Stream s = rng::Stream::of(11, rng::kDomainSim);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
      x.push_back(static_cast<double>(i) + 0.25 * rng::uniform(s, 100 * trial + i));
      y.push_back(0.3 - 0.05 * x.back() + 0.01 * x.back() * x.back() +
                  0.02 * rng::gaussian(s, 100 * trial + 50 + i));
    }
    const auto fit = stats::polyfit(x, y, 2);
    const auto oracle = polyfit_oracle_deg2(x, y);
    for (int c = 0; c < 3; ++c)
      CHECK(fit[c] == doctest::Approx(oracle[c]).epsilon(1e-9));
  }
}

TEST_CASE("polyfit rejects degenerate designs") {
  std::vector<double> x{1.0, 1.0, 1.0};
  std::vector<double> y{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(stats::polyfit(x, y, 1), std::domain_error);
  CHECK_THROWS_AS(stats::polyfit(std::vector<double>{1.0}, std::vector<double>{1.0}, 1),
                  std::invalid_argument);
}

TEST_CASE("ols exact fit and zero-variance convention") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> y{12, 14, 16, 18};  // y = 2x + 10
  const auto f = stats::ols(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(10.0));
  CHECK(f.r_squared == doctest::Approx(1.0));

  std::vector<double> flat{5, 5, 5, 5};
  const auto g = stats::ols(x, flat);
  CHECK(g.slope == 0.0);
  CHECK(g.r_squared == 1.0);
}

TEST_CASE("draws are pure functions of (stream, counter), across threads") {
  const rng::Stream s = rng::Stream::of(42, rng::kDomainNoise, 3);
  NoiseModel model{NoiseFamily::kStudentT2, 1.0};
  std::vector<double> serial(64);
  for (int i = 0; i < 64; ++i) serial[i] = noise_sample(model, s, i);

  std::vector<double> parallel(64);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = t; i < 64; i += 4) parallel[i] = noise_sample(model, s, i);
    });
  }
  for (auto& th : threads) th.join();
  CHECK(serial == parallel);

  // Distinct streams decorrelate.
  const rng::Stream other = rng::Stream::of(42, rng::kDomainNoise, 4);
  CHECK(noise_sample(model, s, 0) != noise_sample(model, other, 0));
}

TEST_CASE("gaussian sample mean over 1e5 draws is near zero") {
  const rng::Stream s = rng::Stream::of(5, rng::kDomainNoise);
  NoiseModel model{NoiseFamily::kGaussian, 1.0};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += noise_sample(model, s, i);
  const double mean = sum / n;
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
}

TEST_CASE("laplace variance is close to 2 scale^2") {
  const rng::Stream s = rng::Stream::of(6, rng::kDomainNoise);
  NoiseModel model{NoiseFamily::kLaplace, 0.5};
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(noise_sample(model, s, i));
  CHECK(stats::variance(draws) == doctest::Approx(2 * 0.25).epsilon(0.05));
}

TEST_CASE("contaminated gaussian has excess kurtosis") {
  const rng::Stream s = rng::Stream::of(9, rng::kDomainNoise);
  NoiseModel model{NoiseFamily::kContaminatedGaussian, 1.0, 0.05, 10.0};
  double m2 = 0.0, m4 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = noise_sample(model, s, i);
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  const double kurtosis = m4 / (m2 * m2);
  CHECK(kurtosis > 10.0);  // Gaussian would be 3
}

TEST_CASE("student t(2) sample variance diverges along a doubling ladder") {
  const rng::Stream s = rng::Stream::of(12, rng::kDomainNoise);
  NoiseModel model{NoiseFamily::kStudentT2, 1.0};
  std::vector<double> draws;
  double prev_var = 0.0;
  double max_ratio = 0.0;
  for (int block = 0; block < 10; ++block) {
    const std::size_t target = 1000u << block;
    while (draws.size() < target)
      draws.push_back(noise_sample(model, s, draws.size()));
    const double var = stats::variance(draws);
    if (block > 0 && prev_var > 0.0) max_ratio = std::max(max_ratio, var / prev_var);
    prev_var = var;
  }
  CHECK(max_ratio > 1.5);

  // Gaussian control stabilizes.
  NoiseModel gauss{NoiseFamily::kGaussian, 1.0};
  draws.clear();
  prev_var = 0.0;
  max_ratio = 0.0;
  for (int block = 0; block < 10; ++block) {
    const std::size_t target = 1000u << block;
    while (draws.size() < target)
      draws.push_back(noise_sample(gauss, s.sub(1), draws.size()));
    const double var = stats::variance(draws);
    if (block > 0 && prev_var > 0.0) max_ratio = std::max(max_ratio, var / prev_var);
    prev_var = var;
  }
  CHECK(max_ratio < 1.5);
}

TEST_CASE("student t(2) quantile matches the closed-form inverse") {
  // P(T <= 4.3027) = 0.975 for t with 2 degrees of freedom.
  const rng::Stream s = rng::Stream::of(13, rng::kDomainNoise);
  NoiseModel model{NoiseFamily::kStudentT2, 1.0};
  std::vector<double> draws;
  for (int i = 0; i < 200000; ++i) draws.push_back(noise_sample(model, s, i));
  CHECK(stats::quantile(draws, 0.975) == doctest::Approx(4.3027).epsilon(0.05));
}
