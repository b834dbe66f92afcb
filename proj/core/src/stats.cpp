#include "m2m/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace m2m {

double quantile_sorted(std::span<const Nanos> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptySample, "quantile of empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  const auto a = static_cast<double>(sorted[lo]);
  const auto b = static_cast<double>(sorted[hi]);
  return a + frac * (b - a);
}

SummaryStats summarize(std::span<const Nanos> samples, std::span<const Nanos> thresholds) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "summarize needs at least one sample");
  std::vector<Nanos> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.n = sorted.size();
  s.min_ns = sorted.front();
  s.max_ns = sorted.back();

  // Accumulate around the minimum so the sum stays small and, for integer
  // shifts, the deviations are shift-exact.
  long double sum = 0.0L;
  for (Nanos x : sorted) sum += static_cast<long double>(x - s.min_ns);
  const long double mean_dev = sum / static_cast<long double>(s.n);
  long double sq = 0.0L;
  for (Nanos x : sorted) {
    const long double d = static_cast<long double>(x - s.min_ns) - mean_dev;
    sq += d * d;
  }
  s.mean_ns = static_cast<double>(static_cast<long double>(s.min_ns) + mean_dev);
  s.std_ns = static_cast<double>(std::sqrt(sq / static_cast<long double>(s.n)));

  s.q1_ns = quantile_sorted(sorted, 0.25);
  s.median_ns = quantile_sorted(sorted, 0.5);
  s.q3_ns = quantile_sorted(sorted, 0.75);
  s.iqr_ns = s.q3_ns - s.q1_ns;

  for (Nanos t : thresholds) {
    const auto over = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    s.frac_over[t] = static_cast<double>(over) / static_cast<double>(s.n);
  }
  return s;
}

BoxPlot boxplot_data(std::span<const Nanos> samples) {
  if (samples.size() < 5) throw Error(ErrorCode::TooFewSamples, "box plot needs at least 5 samples");
  std::vector<Nanos> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  BoxPlot box;
  box.q1_ns = quantile_sorted(sorted, 0.25);
  box.median_ns = quantile_sorted(sorted, 0.5);
  box.q3_ns = quantile_sorted(sorted, 0.75);
  const double reach = 1.5 * (box.q3_ns - box.q1_ns);
  const double lo_fence = box.q1_ns - reach;
  const double hi_fence = box.q3_ns + reach;

  box.whisker_lo_ns = sorted.back();
  box.whisker_hi_ns = sorted.front();
  for (Nanos x : sorted) {
    const auto v = static_cast<double>(x);
    if (v < lo_fence || v > hi_fence) {
      box.outliers.push_back(x);
    } else {
      box.whisker_lo_ns = std::min(box.whisker_lo_ns, x);
      box.whisker_hi_ns = std::max(box.whisker_hi_ns, x);
    }
  }
  return box;
}

}  // namespace m2m
