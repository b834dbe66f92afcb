#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "m2m/event.hpp"
#include "m2m/stats.hpp"

namespace m2m {

// Offset convention: offset of node b relative to node a is t_b - t_a for the
// same physical instant. A ClockModel describes one node's error against true
// time; the inter-node offset is the difference of two such errors.
struct ClockModel {
  static constexpr double kFreeRunning = std::numeric_limits<double>::infinity();

  Nanos initial_offset_ns = 0;
  double drift_ppm = 0.0;
  double jitter_std_ns = 0.0;
  double correction_interval_s = 1.0;  // kFreeRunning disables discipline
  double correction_gain = 1.0;        // (0, 1]
  double spike_prob = 0.0;
  Nanos spike_max_ns = 0;

  // Throws ConfigInvalid when an invariant is violated.
  void validate() const;

  friend bool operator==(const ClockModel&, const ClockModel&) = default;
};

enum class SyncMode { CoReferenced, Autonomous };

const char* to_string(SyncMode mode) noexcept;
SyncMode parse_sync_mode(std::string_view text);

struct ClockPair {
  ClockModel operator_clock;
  ClockModel vehicle_clock;

  static ClockPair ideal() { return {ClockModel{}, ClockModel{}}; }
  static ClockPair preset(SyncMode mode);

  friend bool operator==(const ClockPair&, const ClockPair&) = default;
};

// Reaction time of the Hall-effect sensor, the only non-negligible part of
// the signal path.
inline constexpr Nanos kCircuitDelayNs = 2 * kNanosPerMicro;

// Error of a node clock at true time t_true_ns (ns since the start of the
// run). Pure in (model, t_true_ns, seed): jitter, spikes and the discipline
// schedule phase are derived from a counter-based hash, not from stream state.
Nanos sample_clock_error(const ClockModel& model, Nanos t_true_ns, std::uint64_t seed);

struct OffsetSample {
  Nanos t_ref_ns = 0;
  Nanos offset_ns = 0;

  friend bool operator==(const OffsetSample&, const OffsetSample&) = default;
};

struct OffsetSeries {
  std::vector<OffsetSample> samples;
  SummaryStats abs_stats;     // of |offset|; what the precision summary reports
  SummaryStats signed_stats;  // of the signed offset
  std::size_t unmatched = 0;
  bool paired_by_seq = false;
};

// Shared-pulse comparison; per pulse offset = t_wall_a - t_wall_b, t_ref is
// node a's wall time. Only SharedPulse records are used when any exist.
// Pairs by seq when the logs share seq numbers, otherwise by order. More than
// max_unmatched_frac unmatched pulses raises LengthMismatch.
OffsetSeries precision_analysis(const EventLog& log_a, const EventLog& log_b,
                                double max_unmatched_frac = 0.01);

std::string write_offset_csv(const OffsetSeries& series);

struct SchedulingStats {
  NodeId node;
  Nanos min_ns = 0;
  Nanos max_ns = 0;
  double mean_ns = 0.0;
};

SchedulingStats scheduling_stats(const NodeId& node, std::span<const Nanos> latencies_ns);

// One latency per line, optional non-numeric header, '#' comments.
std::vector<Nanos> parse_latency_samples(std::string_view text);

// Worst case when one node sees its maximum and the other its minimum.
Nanos kernel_asymmetry(const SchedulingStats& a, const SchedulingStats& b);

}  // namespace m2m
