#include "m2m/report.hpp"

#include <cstdio>
#include <sstream>

#include "m2m/version.hpp"

namespace m2m {

namespace {

std::string ms(double ns, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, ns / 1e6);
  return buf;
}

std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string meta_or(const EventLog& log, const std::string& key, const std::string& fallback) {
  auto it = log.meta.find(key);
  return it == log.meta.end() ? fallback : it->second;
}

}  // namespace

Report build_report(std::string label, std::span<const Nanos> samples_ns, Provenance provenance,
                    std::span<const Nanos> thresholds_ns) {
  Report r;
  r.label = std::move(label);
  r.stats = summarize(samples_ns, thresholds_ns);
  if (samples_ns.size() >= 5) r.boxplot = boxplot_data(samples_ns);
  if (provenance.tool_version.empty()) provenance.tool_version = std::string(kToolVersion);
  r.provenance = std::move(provenance);
  return r;
}

Analysis analyze(const EventLog& op_log, const EventLog& veh_log, const PairingConfig& cfg, std::string label,
                 std::span<const Nanos> thresholds_ns) {
  Analysis a;
  a.pairing = pair_events(op_log, veh_log, cfg);
  if (a.pairing.samples.empty()) throw Error(ErrorCode::EmptySample, "no operator/vehicle events could be paired");
  const std::vector<Nanos> default_thresholds = {kOneSecondNs};
  if (thresholds_ns.empty()) thresholds_ns = default_thresholds;

  std::ostringstream key;
  key << "debounce_ns=" << cfg.debounce_ns << ";min_latency_ns=" << cfg.min_latency_ns
      << ";max_window_ns=" << cfg.max_window_ns << ";op=" << meta_or(op_log, "config_hash", "-")
      << ";veh=" << meta_or(veh_log, "config_hash", "-");
  Provenance prov{fnv_hex(key.str()), meta_or(op_log, "seed", "none"), std::string(kToolVersion)};

  const auto latencies = a.pairing.latencies();
  a.report = build_report(std::move(label), latencies, std::move(prov), thresholds_ns);
  a.report.pairing = a.pairing;
  return a;
}

std::string render_report(const Report& report) {
  const auto& s = report.stats;
  std::ostringstream out;
  out << "M2M latency report: " << report.label << '\n'
      << "  provenance: config_hash=" << report.provenance.config_hash << " seed=" << report.provenance.seed
      << " version=" << report.provenance.tool_version << '\n';
  if (report.pairing) {
    const auto& p = *report.pairing;
    out << "  pairing: accepted=" << p.samples.size() << " unmatched_op=" << p.unmatched_op
        << " unmatched_veh=" << p.unmatched_veh << " negative_candidates=" << p.negative_candidates
        << " suppressed_op=" << p.suppressed_op << " suppressed_veh=" << p.suppressed_veh << '\n';
  }
  out << "  n=" << s.n << '\n'
      << "  min_ms=" << ms(static_cast<double>(s.min_ns)) << " max_ms=" << ms(static_cast<double>(s.max_ns)) << '\n'
      << "  mean_ms=" << ms(s.mean_ns) << " std_ms=" << ms(s.std_ns) << '\n'
      << "  median_ms=" << ms(s.median_ns) << " q1_ms=" << ms(s.q1_ns) << " q3_ms=" << ms(s.q3_ns)
      << " iqr_ms=" << ms(s.iqr_ns) << '\n';
  for (const auto& [t, f] : s.frac_over) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * f);
    out << "  over_" << ms(static_cast<double>(t), 0) << "ms_pct=" << buf << '\n';
  }
  if (report.boxplot) {
    const auto& b = *report.boxplot;
    out << "  boxplot: whisker_lo_ms=" << ms(static_cast<double>(b.whisker_lo_ns)) << " q1_ms=" << ms(b.q1_ns)
        << " median_ms=" << ms(b.median_ns) << " q3_ms=" << ms(b.q3_ns)
        << " whisker_hi_ms=" << ms(static_cast<double>(b.whisker_hi_ns)) << " outliers=" << b.outliers.size()
        << '\n';
  }
  return out.str();
}

std::string stats_csv(const SummaryStats& s) {
  std::ostringstream out;
  out.precision(17);
  out << "n,min_ns,max_ns,mean_ns,std_ns,median_ns,q1_ns,q3_ns,iqr_ns";
  for (const auto& [t, f] : s.frac_over) out << ",frac_over_" << t;
  out << '\n'
      << s.n << ',' << s.min_ns << ',' << s.max_ns << ',' << s.mean_ns << ',' << s.std_ns << ',' << s.median_ns
      << ',' << s.q1_ns << ',' << s.q3_ns << ',' << s.iqr_ns;
  for (const auto& [t, f] : s.frac_over) out << ',' << f;
  out << '\n';
  return out.str();
}

std::string boxplot_csv(const BoxPlot& b) {
  std::ostringstream out;
  out.precision(17);
  out << "field,value_ns\n"
      << "whisker_lo," << b.whisker_lo_ns << '\n'
      << "q1," << b.q1_ns << '\n'
      << "median," << b.median_ns << '\n'
      << "q3," << b.q3_ns << '\n'
      << "whisker_hi," << b.whisker_hi_ns << '\n';
  for (Nanos x : b.outliers) out << "outlier," << x << '\n';
  return out.str();
}

std::string render_precision(const OffsetSeries& series, std::span<const SchedulingStats> scheduling) {
  std::ostringstream out;
  const auto& a = series.abs_stats;
  const auto& s = series.signed_stats;
  out << "Synchronization offset (ms), " << a.n << " pulses, paired by " << (series.paired_by_seq ? "seq" : "order")
      << ", unmatched " << series.unmatched << '\n'
      << "  |offset|: min=" << ms(static_cast<double>(a.min_ns), 6) << " max=" << ms(static_cast<double>(a.max_ns), 6)
      << " mean=" << ms(a.mean_ns, 6) << " std=" << ms(a.std_ns, 6) << '\n'
      << "  signed (a - b): min=" << ms(static_cast<double>(s.min_ns), 6)
      << " max=" << ms(static_cast<double>(s.max_ns), 6) << " mean=" << ms(s.mean_ns, 6)
      << " std=" << ms(s.std_ns, 6) << '\n';
  if (!scheduling.empty()) {
    out << "Scheduling latency (ms)\n";
    for (const auto& st : scheduling) {
      out << "  " << st.node.id << ": min=" << ms(static_cast<double>(st.min_ns))
          << " max=" << ms(static_cast<double>(st.max_ns)) << " mean=" << ms(st.mean_ns) << '\n';
    }
  }
  return out.str();
}

}  // namespace m2m
