#include "m2m/delay_dist.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

namespace m2m {

namespace {

// Phi^{-1}(0.75)
constexpr double kQuartileZ = 0.6744897501960817;

constexpr double kMinGammaShape = 0.05;
constexpr double kMaxGammaShape = 1e6;

double normal_quantile(double u) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, u);
}

double gamma_quantile(double shape, double u) {
  return boost::math::quantile(boost::math::gamma_distribution<double>(shape, 1.0), u);
}

double gamma_spread_ratio(double shape) {
  return (gamma_quantile(shape, 0.75) - gamma_quantile(shape, 0.25)) / gamma_quantile(shape, 0.5);
}

}  // namespace

const char* to_string(DelayKind kind) noexcept {
  switch (kind) {
    case DelayKind::Constant: return "constant";
    case DelayKind::LogNormal: return "lognormal";
    case DelayKind::Gamma: return "gamma";
    case DelayKind::Empirical: return "empirical";
  }
  return "constant";
}

DelayKind parse_delay_kind(std::string_view text) {
  if (text == "constant") return DelayKind::Constant;
  if (text == "lognormal") return DelayKind::LogNormal;
  if (text == "gamma") return DelayKind::Gamma;
  if (text == "empirical") return DelayKind::Empirical;
  throw Error(ErrorCode::ConfigInvalid, "unknown delay kind '" + std::string(text) + "'");
}

DelayDist DelayDist::constant(Nanos value_ns) {
  if (value_ns < 0) throw Error(ErrorCode::ConfigInvalid, "constant delay must be >= 0");
  DelayDist d;
  d.kind_ = DelayKind::Constant;
  d.constant_ns_ = value_ns;
  return d;
}

DelayDist DelayDist::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::ConfigInvalid, "lognormal needs finite mu and sigma > 0");
  }
  DelayDist d;
  d.kind_ = DelayKind::LogNormal;
  d.mu_ = mu;
  d.sigma_ = sigma;
  return d;
}

DelayDist DelayDist::gamma(double shape, double scale_ns) {
  if (!(shape > 0.0) || !(scale_ns > 0.0) || !std::isfinite(shape) || !std::isfinite(scale_ns)) {
    throw Error(ErrorCode::ConfigInvalid, "gamma needs shape > 0 and scale > 0");
  }
  DelayDist d;
  d.kind_ = DelayKind::Gamma;
  d.shape_ = shape;
  d.scale_ns_ = scale_ns;
  return d;
}

DelayDist DelayDist::empirical(std::vector<Nanos> samples_ns) {
  if (samples_ns.empty()) throw Error(ErrorCode::ConfigInvalid, "empirical delay needs samples");
  if (std::any_of(samples_ns.begin(), samples_ns.end(), [](Nanos x) { return x < 0; })) {
    throw Error(ErrorCode::ConfigInvalid, "empirical delays must be >= 0");
  }
  std::sort(samples_ns.begin(), samples_ns.end());
  DelayDist d;
  d.kind_ = DelayKind::Empirical;
  d.samples_ = std::move(samples_ns);
  return d;
}

double DelayDist::quantile(double u) const {
  switch (kind_) {
    case DelayKind::Constant:
      return static_cast<double>(constant_ns_);
    case DelayKind::LogNormal:
      return std::exp(mu_ + sigma_ * normal_quantile(u));
    case DelayKind::Gamma:
      return scale_ns_ * gamma_quantile(shape_, u);
    case DelayKind::Empirical: {
      // Bootstrap resampling: each stored value carries mass 1/n.
      const auto n = samples_.size();
      const auto idx = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
      return static_cast<double>(samples_[idx]);
    }
  }
  return 0.0;
}

Nanos DelayDist::draw(double u) const {
  if (kind_ == DelayKind::Constant) return constant_ns_;
  return std::max<Nanos>(0, std::llround(quantile(u)));
}

DelayDist DelayDist::scaled(double k) const {
  if (!(k > 0.0)) throw Error(ErrorCode::ConfigInvalid, "scale factor must be positive");
  switch (kind_) {
    case DelayKind::Constant:
      return constant(std::llround(static_cast<double>(constant_ns_) * k));
    case DelayKind::LogNormal:
      return lognormal(mu_ + std::log(k), sigma_);
    case DelayKind::Gamma:
      return gamma(shape_, scale_ns_ * k);
    case DelayKind::Empirical: {
      std::vector<Nanos> s(samples_);
      for (auto& x : s) x = std::llround(static_cast<double>(x) * k);
      return empirical(std::move(s));
    }
  }
  return *this;
}

DelayDist fit_delay_dist(DelayKind kind, Nanos median_ns, Nanos iqr_ns) {
  if (kind == DelayKind::Constant) return DelayDist::constant(median_ns);
  if (median_ns <= 0 || iqr_ns <= 0) throw Error(ErrorCode::Unfittable, "median and IQR must be positive");
  const auto m = static_cast<double>(median_ns);
  const auto q = static_cast<double>(iqr_ns);
  switch (kind) {
    case DelayKind::LogNormal: {
      // IQR = m (e^{z s} - e^{-z s}) = 2 m sinh(z s)
      return DelayDist::lognormal(std::log(m), std::asinh(q / (2.0 * m)) / kQuartileZ);
    }
    case DelayKind::Gamma: {
      const double target = q / m;
      double lo = std::log(kMinGammaShape);
      double hi = std::log(kMaxGammaShape);
      if (target > gamma_spread_ratio(kMinGammaShape) || target < gamma_spread_ratio(kMaxGammaShape)) {
        throw Error(ErrorCode::Unfittable, "IQR/median ratio outside the gamma shape range");
      }
      // The spread ratio falls monotonically with shape.
      for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_spread_ratio(std::exp(mid)) > target) lo = mid;
        else hi = mid;
      }
      const double shape = std::exp(0.5 * (lo + hi));
      return DelayDist::gamma(shape, m / gamma_quantile(shape, 0.5));
    }
    case DelayKind::Empirical:
      throw Error(ErrorCode::Unfittable, "empirical distributions are built from samples, not fitted");
    case DelayKind::Constant:
      break;
  }
  return DelayDist::constant(median_ns);
}

}  // namespace m2m
