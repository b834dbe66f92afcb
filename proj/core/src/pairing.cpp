#include "m2m/pairing.hpp"

#include <sstream>

namespace m2m {

void PairingConfig::validate() const {
  if (debounce_ns < 0) throw Error(ErrorCode::ConfigInvalid, "debounce must be >= 0");
  if (min_latency_ns < 0) throw Error(ErrorCode::ConfigInvalid, "min_latency must be >= 0");
  if (max_window_ns <= min_latency_ns) throw Error(ErrorCode::ConfigInvalid, "max_window must exceed min_latency");
}

std::vector<Nanos> PairingReport::latencies() const {
  std::vector<Nanos> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.m2m_ns);
  return out;
}

EventLog debounce(const EventLog& log, Nanos debounce_ns) {
  EventLog out;
  out.node = log.node;
  out.meta = log.meta;
  out.records.reserve(log.records.size());
  for (const auto& r : log.records) {
    if (out.records.empty() || r.t_wall_ns - out.records.back().t_wall_ns >= debounce_ns) {
      out.records.push_back(r);
    }
  }
  return out;
}

Nanos compute_m2m(const EventRecord& e1, const EventRecord& e2) {
  if (e1.node.role != Role::Operator || e2.node.role != Role::Vehicle) {
    throw Error(ErrorCode::RoleMismatch, "expected an operator event followed by a vehicle event");
  }
  return e2.t_wall_ns - e1.t_wall_ns;
}

PairingReport pair_events(const EventLog& op_log, const EventLog& veh_log, const PairingConfig& cfg) {
  cfg.validate();
  if (op_log.empty() || veh_log.empty()) throw Error(ErrorCode::EmptyLog, "pairing needs two non-empty logs");
  if (op_log.node.role != Role::Operator || veh_log.node.role != Role::Vehicle) {
    throw Error(ErrorCode::RoleMismatch, "logs must be operator then vehicle");
  }

  const EventLog ops = debounce(op_log, cfg.debounce_ns);
  const EventLog vehs = debounce(veh_log, cfg.debounce_ns);

  PairingReport report;
  report.raw_op = op_log.size();
  report.raw_veh = veh_log.size();
  report.suppressed_op = op_log.size() - ops.size();
  report.suppressed_veh = veh_log.size() - vehs.size();

  // Vehicle events are in (time, seq) order, and windows of successive
  // operator events only move forward, so every vehicle event before the
  // cursor is either consumed or unreachable.
  const auto& v = vehs.records;
  std::vector<bool> consumed(v.size(), false);
  std::size_t cursor = 0;
  for (const auto& op : ops.records) {
    const Nanos lo = op.t_wall_ns + cfg.min_latency_ns;
    const Nanos hi = op.t_wall_ns + cfg.max_window_ns;
    while (cursor < v.size() && (consumed[cursor] || v[cursor].t_wall_ns < lo)) ++cursor;
    if (cursor < v.size() && v[cursor].t_wall_ns <= hi) {
      consumed[cursor] = true;
      report.samples.push_back({op, v[cursor], compute_m2m(op, v[cursor])});
    }
  }
  report.unmatched_op = ops.size() - report.samples.size();
  report.unmatched_veh = vehs.size() - report.samples.size();

  std::size_t op_idx = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (consumed[i]) continue;
    while (op_idx < ops.size() && ops.records[op_idx].t_wall_ns <= v[i].t_wall_ns) ++op_idx;
    if (op_idx < ops.size() && ops.records[op_idx].t_wall_ns - v[i].t_wall_ns <= cfg.max_window_ns) {
      ++report.negative_candidates;
    }
  }
  return report;
}

std::string write_pairing_csv(const PairingReport& report) {
  std::ostringstream out;
  out << "op_seq,veh_seq,op_t_wall_ns,veh_t_wall_ns,m2m_ns\n";
  for (const auto& s : report.samples) {
    out << s.op_event.seq << ',' << s.veh_event.seq << ',' << s.op_event.t_wall_ns << ','
        << s.veh_event.t_wall_ns << ',' << s.m2m_ns << '\n';
  }
  return out.str();
}

std::string write_pairing_meta(const PairingReport& report) {
  std::ostringstream out;
  out << "accepted=" << report.samples.size() << '\n'
      << "raw_op=" << report.raw_op << '\n'
      << "raw_veh=" << report.raw_veh << '\n'
      << "unmatched_op=" << report.unmatched_op << '\n'
      << "unmatched_veh=" << report.unmatched_veh << '\n'
      << "negative_candidates=" << report.negative_candidates << '\n'
      << "suppressed_op=" << report.suppressed_op << '\n'
      << "suppressed_veh=" << report.suppressed_veh << '\n';
  return out.str();
}

}  // namespace m2m
