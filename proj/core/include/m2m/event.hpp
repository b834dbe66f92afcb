#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "m2m/error.hpp"

namespace m2m {

// All timestamps are signed 64-bit nanoseconds.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

enum class Role { Operator, Vehicle };

enum class EventSource { HallEdge, SharedPulse, Synthetic };

const char* to_string(Role role) noexcept;
const char* to_string(EventSource source) noexcept;
std::optional<EventSource> parse_source(std::string_view text) noexcept;

struct NodeId {
  std::string id;
  Role role = Role::Operator;

  static NodeId operator_node() { return {"operator", Role::Operator}; }
  static NodeId vehicle_node() { return {"vehicle", Role::Vehicle}; }

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct EventRecord {
  NodeId node;
  std::uint64_t seq = 0;
  Nanos t_wall_ns = 0;
  std::optional<Nanos> t_mono_ns;
  EventSource source = EventSource::HallEdge;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct EventLog {
  NodeId node;
  std::vector<EventRecord> records;
  std::map<std::string, std::string> meta;

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }

  // Throws NonMonotonicSeq / NonMonotonicTime / UnparseableLine (foreign
  // node) with the offending 1-based record index as line.
  void validate() const;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

enum class LogFormat { Csv, KernelRing };

struct ParseOptions {
  // Role of the recording node. When unset it is inferred from the node id
  // ("operator" / "vehicle"); any other id without a role is rejected.
  std::optional<Role> role;
  // Node id for KernelRing input, which carries no node column. Defaults to
  // the role name.
  std::string node_id;
  bool lenient = false;
  bool allow_empty = false;
};

struct RejectedLine {
  std::size_t line_no = 0;
  ErrorCode reason = ErrorCode::UnparseableLine;
};

struct ParseResult {
  EventLog log;
  std::vector<RejectedLine> rejected;  // only populated in lenient mode
};

// CSV: optional header `node,seq,t_wall_ns[,t_mono_ns][,source]`, optional
// leading `#meta key=value` lines. KernelRing: lines containing
// `m2m_irq: seq=<uint> ts=<uint> src=<hall|pulse>`; lines without the tag
// are not events and are ignored.
ParseResult parse_log_detailed(std::string_view text, LogFormat format,
                               const ParseOptions& options = {});

EventLog parse_log(std::string_view text, LogFormat format,
                   const ParseOptions& options = {});

// Emits `#meta` lines (if any), the header, then one line per record.
// The t_mono_ns column is present iff some record carries it.
std::string write_log(const EventLog& log);

}  // namespace m2m
