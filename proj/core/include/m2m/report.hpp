#pragma once

#include <optional>
#include <string>
#include <vector>

#include "m2m/clock.hpp"
#include "m2m/error_budget.hpp"
#include "m2m/pairing.hpp"
#include "m2m/stats.hpp"

namespace m2m {

struct Provenance {
  std::string config_hash;
  std::string seed;  // "none" for captured field logs
  std::string tool_version;
};

struct Report {
  std::string label;
  std::optional<PairingReport> pairing;
  SummaryStats stats;
  std::optional<BoxPlot> boxplot;  // needs >= 5 samples
  Provenance provenance;
};

inline constexpr Nanos kOneSecondNs = kNanosPerSecond;

Report build_report(std::string label, std::span<const Nanos> samples_ns, Provenance provenance,
                    std::span<const Nanos> thresholds_ns = {});

struct Analysis {
  PairingReport pairing;
  Report report;
};

// debounce -> pair -> summarize on two captured logs. Provenance is taken
// from the logs' meta (seed, config_hash) combined with the pairing config.
Analysis analyze(const EventLog& op_log, const EventLog& veh_log, const PairingConfig& cfg = {},
                 std::string label = "analysis", std::span<const Nanos> thresholds_ns = {});

std::string render_report(const Report& report);
std::string stats_csv(const SummaryStats& stats);
std::string boxplot_csv(const BoxPlot& box);

// Offset summary text for a precision run plus optional scheduling blocks.
std::string render_precision(const OffsetSeries& series, std::span<const SchedulingStats> scheduling = {});

}  // namespace m2m
