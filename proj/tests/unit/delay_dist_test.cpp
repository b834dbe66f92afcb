#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "m2m/delay_dist.hpp"
#include "m2m/stats.hpp"

namespace m2m {
namespace {

constexpr Nanos ms = kNanosPerMilli;

double lognormal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

// Regularized lower incomplete gamma by its power series.
double gamma_cdf(double x, double shape) {
  double term = 1.0 / shape, sum = term;
  for (int n = 1; n < 10'000; ++n) {
    term *= x / (shape + n);
    sum += term;
    if (term < sum * 1e-16) break;
  }
  return std::exp(shape * std::log(x) - x - std::lgamma(shape)) * sum;
}

SummaryStats monte_carlo(const DelayDist& d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Nanos> x(n);
  for (auto& v : x) {
    double w = 0.0;
    while (w == 0.0) w = u(rng);
    v = d.draw(w);
  }
  const Nanos thr[] = {kNanosPerSecond};
  return summarize(x, thr);
}

TEST(DelayDist, ConstantIsExact) {
  const auto d = fit_delay_dist(DelayKind::Constant, 163 * ms, 999);
  for (double u : {1e-9, 0.25, 0.5, 0.999999}) EXPECT_EQ(d.draw(u), 163 * ms);
  EXPECT_DOUBLE_EQ(d.iqr_ns(), 0.0);
  EXPECT_THROW(DelayDist::constant(-1), Error);
}

TEST(DelayDist, LogNormalFitHitsQuartilesAnalytically) {
  for (auto [m, q] : {std::pair<Nanos, Nanos>{874'500'000, 198'000'000}, {767'800'000, 141'700'000},
                      {20 * ms, 12 * ms}, {45 * ms, 30 * ms}, {1'000, 5'000}}) {
    const auto d = fit_delay_dist(DelayKind::LogNormal, m, q);
    EXPECT_NEAR(d.median_ns(), static_cast<double>(m), 1e-6 * m);
    EXPECT_NEAR(d.iqr_ns(), static_cast<double>(q), 1e-6 * q);
    // independent CDF check
    EXPECT_NEAR(lognormal_cdf(d.quantile(0.25), d.mu(), d.sigma()), 0.25, 1e-9);
    EXPECT_NEAR(lognormal_cdf(d.quantile(0.75), d.mu(), d.sigma()), 0.75, 1e-9);
  }
}

TEST(DelayDist, LogNormalFitMonteCarlo) {
  const auto d = fit_delay_dist(DelayKind::LogNormal, 874'500'000, 198'000'000);
  const auto s = monte_carlo(d, 100'000, 77);
  EXPECT_NEAR(s.median_ns, 874.5e6, 0.01 * 874.5e6);
  EXPECT_NEAR(s.iqr_ns, 198e6, 0.03 * 198e6);
}

TEST(DelayDist, TailMassOfDynamicCoReferencedFit) {
  const auto d = fit_delay_dist(DelayKind::LogNormal, 767'800'000, 141'700'000);
  const double tail = 1.0 - lognormal_cdf(1e9, d.mu(), d.sigma());
  EXPECT_GT(tail, 0.005);
  EXPECT_LT(tail, 0.09);
  const auto s = monte_carlo(d, 100'000, 4);
  EXPECT_NEAR(s.frac_over.at(kNanosPerSecond), tail, 0.005);
}

TEST(DelayDist, GammaFitHitsQuartiles) {
  for (auto [m, q] : {std::pair<Nanos, Nanos>{874'500'000, 198'000'000}, {20 * ms, 12 * ms}, {10 * ms, 30 * ms}}) {
    const auto d = fit_delay_dist(DelayKind::Gamma, m, q);
    EXPECT_NEAR(d.median_ns(), static_cast<double>(m), 1e-6 * m);
    EXPECT_NEAR(d.iqr_ns(), static_cast<double>(q), 1e-5 * q);
    const double s = d.scale_ns();
    EXPECT_NEAR(gamma_cdf(d.quantile(0.5) / s, d.shape()), 0.5, 1e-8);
    EXPECT_NEAR(gamma_cdf(d.quantile(0.75) / s, d.shape()), 0.75, 1e-8);
  }
}

TEST(DelayDist, UnfittableCases) {
  const auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code([] { fit_delay_dist(DelayKind::Empirical, 10, 1); }), ErrorCode::Unfittable);
  EXPECT_EQ(code([] { fit_delay_dist(DelayKind::LogNormal, 0, 1); }), ErrorCode::Unfittable);
  EXPECT_EQ(code([] { fit_delay_dist(DelayKind::LogNormal, 10, 0); }), ErrorCode::Unfittable);
  EXPECT_EQ(code([] { fit_delay_dist(DelayKind::Gamma, kNanosPerSecond, 1); }), ErrorCode::Unfittable);
  EXPECT_EQ(code([] { fit_delay_dist(DelayKind::Gamma, 1, kNanosPerSecond); }), ErrorCode::Unfittable);
}

TEST(DelayDist, ScalingMultipliesQuantiles) {
  const DelayDist dists[] = {DelayDist::lognormal(std::log(5e7), 0.3), DelayDist::gamma(4.0, 1e6),
                             DelayDist::constant(100), DelayDist::empirical({1000, 2000, 3000, 4000})};
  for (const auto& d : dists) {
    const auto s = d.scaled(2.5);
    for (double u : {0.1, 0.5, 0.9}) EXPECT_NEAR(s.quantile(u), 2.5 * d.quantile(u), 1e-6 * d.quantile(u));
  }
}

TEST(DelayDist, EmpiricalResamplesStoredValues) {
  const auto d = DelayDist::empirical({30, 10, 20, 40});
  EXPECT_EQ(d.draw(0.01), 10);
  EXPECT_EQ(d.draw(0.26), 20);
  EXPECT_EQ(d.draw(0.99), 40);
  EXPECT_THROW(DelayDist::empirical({}), Error);
  EXPECT_THROW(DelayDist::empirical({-1}), Error);
}

TEST(DelayDist, QuantileIsMonotone) {
  const auto d = fit_delay_dist(DelayKind::Gamma, 45 * ms, 30 * ms);
  double prev = -1.0;
  for (int i = 1; i < 1000; ++i) {
    const double q = d.quantile(i / 1000.0);
    EXPECT_GT(q, prev);
    prev = q;
  }
}

}  // namespace
}  // namespace m2m
