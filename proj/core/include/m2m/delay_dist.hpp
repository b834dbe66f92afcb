#pragma once

#include <string_view>
#include <vector>

#include "m2m/event.hpp"

namespace m2m {

enum class DelayKind { Constant, LogNormal, Gamma, Empirical };

const char* to_string(DelayKind kind) noexcept;
DelayKind parse_delay_kind(std::string_view text);

// A non-negative delay distribution sampled by inverse CDF, so coupled
// (common random number) and stratified draws come for free.
class DelayDist {
 public:
  DelayDist() = default;

  static DelayDist constant(Nanos value_ns);
  // ln(delay_ns) ~ N(mu, sigma^2)
  static DelayDist lognormal(double mu, double sigma);
  static DelayDist gamma(double shape, double scale_ns);
  static DelayDist empirical(std::vector<Nanos> samples_ns);

  DelayKind kind() const noexcept { return kind_; }
  Nanos constant_ns() const noexcept { return constant_ns_; }
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double shape() const noexcept { return shape_; }
  double scale_ns() const noexcept { return scale_ns_; }
  const std::vector<Nanos>& samples() const noexcept { return samples_; }

  // Inverse CDF at u in (0, 1).
  double quantile(double u) const;
  // quantile(u) rounded to the nearest ns and clamped at 0.
  Nanos draw(double u) const;

  double median_ns() const { return quantile(0.5); }
  double iqr_ns() const { return quantile(0.75) - quantile(0.25); }

  // Same family with every delay multiplied by k > 0.
  DelayDist scaled(double k) const;

  friend bool operator==(const DelayDist&, const DelayDist&) = default;

 private:
  DelayKind kind_ = DelayKind::Constant;
  Nanos constant_ns_ = 0;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  double shape_ = 0.0;
  double scale_ns_ = 0.0;
  std::vector<Nanos> samples_;  // sorted
};

// Distribution of the given family whose analytic median and IQR equal the
// targets. Constant ignores iqr_ns. Throws Unfittable when no member of the
// family matches (Empirical, or an IQR outside the Gamma shape range).
DelayDist fit_delay_dist(DelayKind kind, Nanos median_ns, Nanos iqr_ns);

}  // namespace m2m
