#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "m2m/event.hpp"
#include "m2m/stats.hpp"

namespace m2m {

// Wire layout (40 bytes, big-endian integers):
//   0  magic "M2MP"   4  version = 1   5  kind (0 req, 1 resp)   6  seq (u16)
//   8  t1   16  t2   24  t3   32  reserved, zero
inline constexpr std::size_t kProbePacketSize = 40;
inline constexpr std::uint8_t kProbeVersion = 1;

enum class ProbeKind : std::uint8_t { Request = 0, Response = 1 };

struct ProbePacket {
  ProbeKind kind = ProbeKind::Request;
  std::uint16_t seq = 0;
  Nanos t1 = 0;
  Nanos t2 = 0;
  Nanos t3 = 0;

  friend bool operator==(const ProbePacket&, const ProbePacket&) = default;
};

using ProbeBytes = std::array<std::uint8_t, kProbePacketSize>;

ProbeBytes encode_probe(const ProbePacket& packet);

// nullopt for short buffers, wrong magic/version/kind or nonzero reserved bytes.
std::optional<ProbePacket> decode_probe(std::span<const std::uint8_t> bytes);

struct ProbeEstimate {
  Nanos offset_ns = 0;  // remote - local
  Nanos rtt_ns = 0;
};

// offset = ((t2 - t1) + (t3 - t4)) / 2, rounded to nearest (ties away from
// zero); rtt = (t4 - t1) - (t3 - t2). With asymmetric paths the estimate is
// biased by half of (outbound - return) delay. Throws NegativeRtt when the
// quadruple is inconsistent.
ProbeEstimate probe_offset(Nanos t1, Nanos t2, Nanos t3, Nanos t4);

struct ProbeExchange {
  std::uint16_t seq = 0;
  Nanos t1 = 0, t2 = 0, t3 = 0, t4 = 0;
  std::optional<ProbeEstimate> estimate;  // empty when rejected
};

struct ProbeSummary {
  std::size_t completed = 0;
  std::size_t rejected = 0;
  std::optional<SummaryStats> offset_stats;
  std::optional<SummaryStats> rtt_stats;
  std::optional<ProbeEstimate> min_rtt;  // the customary best single estimate
};

// Append-only record of completed exchanges; safe to add from one thread
// while others take snapshots.
class ProbeAggregator {
 public:
  // Returns false when the exchange was rejected (negative RTT).
  bool add(std::uint16_t seq, Nanos t1, Nanos t2, Nanos t3, Nanos t4);

  std::vector<ProbeExchange> snapshot() const;
  ProbeSummary summary() const;

 private:
  mutable std::mutex mu_;
  std::vector<ProbeExchange> exchanges_;
};

std::string write_probe_csv(std::span<const ProbeExchange> exchanges);

using ClockFn = std::function<Nanos()>;

// CLOCK_REALTIME in nanoseconds.
Nanos realtime_now_ns();

// Builds the response for a request, stamping t2 on receipt and t3 on send.
// nullopt when the datagram is not a valid request.
std::optional<ProbeBytes> answer_probe(std::span<const std::uint8_t> request, Nanos t2, const ClockFn& clock);

// In-process exchange over an injected path: the remote clock reads
// local + remote_offset_ns, and each direction takes a fixed delay. All
// packets pass through encode/decode.
class LoopbackProbeHarness {
 public:
  LoopbackProbeHarness(Nanos remote_offset_ns, Nanos outbound_delay_ns, Nanos return_delay_ns,
                       Nanos remote_processing_ns = 0);

  // Runs one exchange starting at local time t1 and records it.
  ProbeExchange exchange(std::uint16_t seq, Nanos t1, ProbeAggregator& sink) const;

 private:
  Nanos remote_offset_ns_;
  Nanos outbound_delay_ns_;
  Nanos return_delay_ns_;
  Nanos remote_processing_ns_;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // "host:port"; throws ConfigInvalid.
  static Endpoint parse(const std::string& text);
};

// UDP responder running its receive loop on a background thread.
class UdpProbeResponder {
 public:
  explicit UdpProbeResponder(const Endpoint& listen, ClockFn clock = realtime_now_ns);
  ~UdpProbeResponder();

  UdpProbeResponder(const UdpProbeResponder&) = delete;
  UdpProbeResponder& operator=(const UdpProbeResponder&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::size_t answered() const noexcept { return answered_.load(); }
  void stop();

 private:
  void loop();

  int fd_ = -1;
  std::uint16_t port_ = 0;
  ClockFn clock_;
  std::atomic<bool> running_{true};
  std::atomic<std::size_t> answered_{0};
  std::thread worker_;
};

struct ProbeClientOptions {
  std::size_t count = 10;
  std::chrono::milliseconds interval{100};
  std::chrono::milliseconds timeout{500};
};

// Sends `count` requests to `peer` and records every answered exchange.
// Returns the number of requests that timed out.
std::size_t run_probe_client(const Endpoint& peer, const ProbeClientOptions& options, ProbeAggregator& sink,
                             const ClockFn& clock = realtime_now_ns);

}  // namespace m2m
