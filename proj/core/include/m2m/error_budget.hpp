#pragma once

#include <string>

#include "m2m/event.hpp"

namespace m2m {

// Overall accuracy band of the measurement framework, inclusive.
inline constexpr Nanos kPrecisionBandLoNs = 10 * kNanosPerMilli;
inline constexpr Nanos kPrecisionBandHiNs = 15 * kNanosPerMilli;

struct CalibModel {
  double misalignment_deg = 1.0;
  double steering_rate_deg_per_s = 100.0;
};

// Timing uncertainty of a sensor misaligned by misalignment_deg on a wheel
// turning at steering_rate_deg_per_s, rounded to the nearest ns (ties away
// from zero). Throws ZeroRate for a non-positive rate, ConfigInvalid for a
// negative or non-finite angle.
Nanos calib_error(const CalibModel& c);

struct ErrorBudget {
  Nanos e_sync_ns = 0;
  Nanos e_circuit_ns = 0;
  Nanos e_kernel_ns = 0;
  Nanos e_calib_ns = 0;
  Nanos e_total_ns = 0;
  bool in_precision_band = false;

  friend bool operator==(const ErrorBudget&, const ErrorBudget&) = default;
};

// Plain sum of the four components. Throws NegativeComponent.
ErrorBudget total_error(Nanos e_sync_ns, Nanos e_circuit_ns, Nanos e_kernel_ns, Nanos e_calib_ns);

std::string budget_key_values(const ErrorBudget& b);
std::string budget_csv_header();
std::string budget_csv_row(const ErrorBudget& b);

}  // namespace m2m
