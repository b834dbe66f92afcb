#include "m2m/error_budget.hpp"

#include <cmath>
#include <sstream>

namespace m2m {

Nanos calib_error(const CalibModel& c) {
  if (!(c.steering_rate_deg_per_s > 0.0)) throw Error(ErrorCode::ZeroRate, "steering rate must be positive");
  if (!(c.misalignment_deg >= 0.0) || !std::isfinite(c.misalignment_deg)) {
    throw Error(ErrorCode::ConfigInvalid, "misalignment must be a non-negative finite angle");
  }
  return std::llround(c.misalignment_deg * 1e9 / c.steering_rate_deg_per_s);
}

ErrorBudget total_error(Nanos e_sync_ns, Nanos e_circuit_ns, Nanos e_kernel_ns, Nanos e_calib_ns) {
  if (e_sync_ns < 0 || e_circuit_ns < 0 || e_kernel_ns < 0 || e_calib_ns < 0) {
    throw Error(ErrorCode::NegativeComponent, "error components must be non-negative");
  }
  ErrorBudget b{e_sync_ns, e_circuit_ns, e_kernel_ns, e_calib_ns, 0, false};
  b.e_total_ns = e_sync_ns + e_circuit_ns + e_kernel_ns + e_calib_ns;
  b.in_precision_band = b.e_total_ns >= kPrecisionBandLoNs && b.e_total_ns <= kPrecisionBandHiNs;
  return b;
}

std::string budget_key_values(const ErrorBudget& b) {
  std::ostringstream out;
  out << "e_sync_ns=" << b.e_sync_ns << '\n'
      << "e_circuit_ns=" << b.e_circuit_ns << '\n'
      << "e_kernel_ns=" << b.e_kernel_ns << '\n'
      << "e_calib_ns=" << b.e_calib_ns << '\n'
      << "e_total_ns=" << b.e_total_ns << '\n'
      << "in_band_10_15ms=" << (b.in_precision_band ? "true" : "false") << '\n';
  return out.str();
}

std::string budget_csv_header() { return "e_sync_ns,e_circuit_ns,e_kernel_ns,e_calib_ns,e_total_ns,in_band\n"; }

std::string budget_csv_row(const ErrorBudget& b) {
  std::ostringstream out;
  out << b.e_sync_ns << ',' << b.e_circuit_ns << ',' << b.e_kernel_ns << ',' << b.e_calib_ns << ','
      << b.e_total_ns << ',' << (b.in_precision_band ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace m2m
