#pragma once

#include <string>
#include <vector>

#include "m2m/event.hpp"

namespace m2m {

struct PairingConfig {
  Nanos debounce_ns = 500 * kNanosPerMilli;
  Nanos min_latency_ns = 0;
  Nanos max_window_ns = 2 * kNanosPerSecond;

  // Throws ConfigInvalid unless max_window_ns > min_latency_ns >= 0 and
  // debounce_ns >= 0.
  void validate() const;
};

struct LatencySample {
  EventRecord op_event;
  EventRecord veh_event;
  Nanos m2m_ns = 0;

  friend bool operator==(const LatencySample&, const LatencySample&) = default;
};

struct PairingReport {
  std::vector<LatencySample> samples;  // ascending op time
  std::size_t unmatched_op = 0;
  std::size_t unmatched_veh = 0;
  // Unmatched vehicle events that precede an operator event by less than
  // max_window, i.e. would have paired with a negative latency.
  std::size_t negative_candidates = 0;
  std::size_t suppressed_op = 0;
  std::size_t suppressed_veh = 0;
  std::size_t raw_op = 0;
  std::size_t raw_veh = 0;

  std::vector<Nanos> latencies() const;
};

// Keeps the first event of each burst: an event closer than debounce_ns to
// the last kept event is dropped.
EventLog debounce(const EventLog& log, Nanos debounce_ns);

// Event_2 - Event_1. Throws RoleMismatch unless e1 is from an Operator node
// and e2 from a Vehicle node.
Nanos compute_m2m(const EventRecord& e1, const EventRecord& e2);

// Debounces both logs, then FIFO matching: in time order each operator event
// takes the earliest unconsumed vehicle event with
// op.t + min_latency <= veh.t <= op.t + max_window (ties by lower seq).
PairingReport pair_events(const EventLog& op_log, const EventLog& veh_log, const PairingConfig& cfg = {});

std::string write_pairing_csv(const PairingReport& report);

// key=value footer with the counts.
std::string write_pairing_meta(const PairingReport& report);

}  // namespace m2m
