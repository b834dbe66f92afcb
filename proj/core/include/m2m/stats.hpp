#pragma once

#include <map>
#include <span>
#include <vector>

#include "m2m/event.hpp"

namespace m2m {

struct SummaryStats {
  std::size_t n = 0;
  Nanos min_ns = 0;
  Nanos max_ns = 0;
  double mean_ns = 0.0;
  double std_ns = 0.0;  // population (divide by n)
  double median_ns = 0.0;
  double q1_ns = 0.0;
  double q3_ns = 0.0;
  double iqr_ns = 0.0;
  std::map<Nanos, double> frac_over;  // threshold -> count(x > t) / n
};

// Linear interpolation between order statistics, h = (n - 1) p.
double quantile_sorted(std::span<const Nanos> sorted, double p);

SummaryStats summarize(std::span<const Nanos> samples, std::span<const Nanos> thresholds = {});

struct BoxPlot {
  double q1_ns = 0.0;
  double median_ns = 0.0;
  double q3_ns = 0.0;
  Nanos whisker_lo_ns = 0;
  Nanos whisker_hi_ns = 0;
  std::vector<Nanos> outliers;  // ascending
};

// Tukey whiskers: the furthest samples within 1.5 IQR of the quartiles.
BoxPlot boxplot_data(std::span<const Nanos> samples);

}  // namespace m2m
