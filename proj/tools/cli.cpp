#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "m2m/clock.hpp"
#include "m2m/error_budget.hpp"
#include "m2m/pairing.hpp"
#include "m2m/probe.hpp"
#include "m2m/report.hpp"
#include "m2m/sim.hpp"
#include "m2m/version.hpp"

namespace m2m::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

Nanos ms_to_ns(double ms) { return std::llround(ms * 1e6); }

LogFormat parse_format(const std::string& s) {
  if (s == "csv") return LogFormat::Csv;
  if (s == "kernel") return LogFormat::KernelRing;
  throw Error(ErrorCode::ConfigInvalid, "unknown log format '" + s + "'");
}

EventLog load_log(const std::string& path, LogFormat format, Role role, bool lenient, std::ostream& err) {
  ParseOptions opts;
  opts.role = role;
  opts.lenient = lenient;
  auto result = parse_log_detailed(read_file(path), format, opts);
  if (!result.rejected.empty()) {
    err << "m2m: warning: " << path << ": " << result.rejected.size() << " malformed lines skipped (first at line "
        << result.rejected.front().line_no << ", " << to_string(result.rejected.front().reason) << ")\n";
  }
  return std::move(result.log);
}

std::string prefixed(const std::string& prefix, const char* suffix) { return prefix + suffix; }

struct SimulateArgs {
  std::string preset;
  std::string config;
  std::size_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool iid = false;
  bool shared_pulse = false;
  std::string sync_mode = "coref";
  std::size_t pulses = 7200;
  double period_ms = 500.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir(a.out);
  if (a.shared_pulse) {
    const auto mode = parse_sync_mode(a.sync_mode);
    const auto seed = a.seed.value_or(1);
    auto run = simulate_shared_pulses(ClockPair::preset(mode), a.pulses, ms_to_ns(a.period_ms), seed);
    run.node_a.meta["seed"] = run.node_b.meta["seed"] = std::to_string(seed);
    run.node_a.meta["sync_mode"] = run.node_b.meta["sync_mode"] = to_string(mode);
    write_file(dir / "node_a.csv", write_log(run.node_a));
    write_file(dir / "node_b.csv", write_log(run.node_b));
    out << "wrote " << a.pulses << " shared pulses per node to " << dir.string() << '\n';
    return kExitOk;
  }

  ScenarioConfig cfg;
  if (!a.config.empty()) cfg = scenario_from_ini(read_file(a.config));
  else if (!a.preset.empty()) cfg = preset(a.preset);
  else throw Error(ErrorCode::ConfigInvalid, "simulate needs --preset or --config");
  if (a.trials > 0) cfg.trials = a.trials;
  if (a.seed) cfg.seed = *a.seed;
  if (a.iid) cfg.stratified = false;

  const auto sim = simulate(cfg);
  for (const auto& w : sim.warnings) err << "m2m: warning: " << w << '\n';
  write_file(dir / "operator.csv", write_log(sim.op_log));
  write_file(dir / "vehicle.csv", write_log(sim.veh_log));
  write_file(dir / "truth.csv", write_truth_csv(sim.truth));
  write_file(dir / "config.echo", scenario_to_ini(cfg));
  out << "simulated " << cfg.trials << " trials of '" << cfg.label << "' (seed " << cfg.seed << ", config "
      << config_hash(cfg) << ") into " << dir.string() << '\n';
  return kExitOk;
}

struct AnalyzeArgs {
  std::string op_path;
  std::string veh_path;
  std::string format = "csv";
  bool lenient = false;
  double debounce_ms = 500.0;
  double min_latency_ms = 0.0;
  double max_window_ms = 2000.0;
  std::vector<double> thresholds_ms{1000.0};
  std::string label = "analysis";
  std::string out;
};

void write_report_files(const std::string& prefix, const Report& report) {
  write_file(prefixed(prefix, ".txt"), render_report(report));
  write_file(prefixed(prefix, ".stats.csv"), stats_csv(report.stats));
  if (report.boxplot) write_file(prefixed(prefix, ".boxplot.csv"), boxplot_csv(*report.boxplot));
}

std::vector<Nanos> thresholds_ns(const std::vector<double>& ms) {
  std::vector<Nanos> out;
  for (double v : ms) out.push_back(ms_to_ns(v));
  return out;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = parse_format(a.format);
  const auto op = load_log(a.op_path, format, Role::Operator, a.lenient, err);
  const auto veh = load_log(a.veh_path, format, Role::Vehicle, a.lenient, err);
  PairingConfig cfg{ms_to_ns(a.debounce_ms), ms_to_ns(a.min_latency_ms), ms_to_ns(a.max_window_ms)};
  const auto th = thresholds_ns(a.thresholds_ms);
  const auto result = analyze(op, veh, cfg, a.label, th);
  out << render_report(result.report);
  if (!a.out.empty()) {
    write_report_files(a.out, result.report);
    write_file(prefixed(a.out, ".pairs.csv"), write_pairing_csv(result.pairing));
    write_file(prefixed(a.out, ".meta"), write_pairing_meta(result.pairing) + "config_hash=" +
                                             result.report.provenance.config_hash + "\nseed=" +
                                             result.report.provenance.seed + "\n");
  }
  return kExitOk;
}

struct PrecisionArgs {
  std::string a_path;
  std::string b_path;
  std::string format = "csv";
  std::string sched_a;
  std::string sched_b;
  double max_unmatched_pct = 1.0;
  std::string out;
};

int cmd_precision(const PrecisionArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = parse_format(a.format);
  const auto log_a = load_log(a.a_path, format, Role::Operator, false, err);
  const auto log_b = load_log(a.b_path, format, Role::Vehicle, false, err);
  const auto series = precision_analysis(log_a, log_b, a.max_unmatched_pct / 100.0);
  std::vector<SchedulingStats> sched;
  if (!a.sched_a.empty()) sched.push_back(scheduling_stats(log_a.node, parse_latency_samples(read_file(a.sched_a))));
  if (!a.sched_b.empty()) sched.push_back(scheduling_stats(log_b.node, parse_latency_samples(read_file(a.sched_b))));
  const auto text = render_precision(series, sched);
  out << text;
  if (sched.size() == 2) out << "kernel_asymmetry_ms=" << kernel_asymmetry(sched[0], sched[1]) / 1e6 << '\n';
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    write_file(dir / "offsets.csv", write_offset_csv(series));
    write_file(dir / "precision.txt", text);
    write_file(dir / "offset_abs.stats.csv", stats_csv(series.abs_stats));
    write_file(dir / "offset_signed.stats.csv", stats_csv(series.signed_stats));
  }
  return kExitOk;
}

struct BudgetArgs {
  double sync_ms = 0.322;
  double kernel_ms = 0.005;
  double circuit_us = 2.0;
  double calib_angle_deg = 1.0;
  double steer_rate_dps = 100.0;
  std::string sched_a;
  std::string sched_b;
  std::string out;
};

int cmd_budget(const BudgetArgs& a, std::ostream& out, std::ostream&) {
  Nanos kernel = ms_to_ns(a.kernel_ms);
  if (!a.sched_a.empty() || !a.sched_b.empty()) {
    if (a.sched_a.empty() || a.sched_b.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "--sched-a and --sched-b must be given together");
    }
    const auto sa = scheduling_stats({"a", Role::Operator}, parse_latency_samples(read_file(a.sched_a)));
    const auto sb = scheduling_stats({"b", Role::Vehicle}, parse_latency_samples(read_file(a.sched_b)));
    kernel = kernel_asymmetry(sa, sb);
  }
  const auto calib = calib_error({a.calib_angle_deg, a.steer_rate_dps});
  const auto budget = total_error(ms_to_ns(a.sync_ms), std::llround(a.circuit_us * 1e3), kernel, calib);
  out << budget_key_values(budget);
  if (!a.out.empty()) {
    write_file(prefixed(a.out, ".txt"), budget_key_values(budget));
    write_file(prefixed(a.out, ".csv"), budget_csv_header() + budget_csv_row(budget));
  }
  return kExitOk;
}

struct ProbeArgs {
  std::string listen;
  std::string peer;
  std::size_t count = 10;
  int interval_ms = 100;
  int timeout_ms = 500;
  double duration_s = 0.0;
  std::string out;
};

volatile std::sig_atomic_t g_stop = 0;

int cmd_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.listen.empty() && a.peer.empty()) throw Error(ErrorCode::ConfigInvalid, "probe needs --listen and/or --peer");
  std::optional<UdpProbeResponder> responder;
  if (!a.listen.empty()) {
    responder.emplace(Endpoint::parse(a.listen));
    out << "responder listening on port " << responder->port() << '\n' << std::flush;
  }
  if (a.peer.empty()) {
    g_stop = 0;
    auto prev = std::signal(SIGINT, [](int) { g_stop = 1; });
    const auto start = std::chrono::steady_clock::now();
    while (!g_stop) {
      if (a.duration_s > 0 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= a.duration_s) {
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    std::signal(SIGINT, prev);
    out << "answered " << responder->answered() << " requests\n";
    return kExitOk;
  }

  ProbeAggregator agg;
  ProbeClientOptions opts{a.count, std::chrono::milliseconds(a.interval_ms), std::chrono::milliseconds(a.timeout_ms)};
  const auto timeouts = run_probe_client(Endpoint::parse(a.peer), opts, agg);
  const auto summary = agg.summary();
  out << "exchanges: completed=" << summary.completed << " rejected=" << summary.rejected
      << " timeouts=" << timeouts << '\n';
  if (summary.offset_stats) {
    const auto& o = *summary.offset_stats;
    const auto& r = *summary.rtt_stats;
    out << "offset_ns: median=" << o.median_ns << " mean=" << o.mean_ns << " min=" << o.min_ns
        << " max=" << o.max_ns << '\n'
        << "rtt_ns: median=" << r.median_ns << " min=" << r.min_ns << " max=" << r.max_ns << '\n'
        << "min_rtt_offset_ns=" << summary.min_rtt->offset_ns << '\n';
  } else {
    err << "m2m: warning: no valid exchanges\n";
  }
  if (!a.out.empty()) {
    const auto snap = agg.snapshot();
    write_file(a.out, write_probe_csv(snap));
  }
  return summary.completed > 0 ? kExitOk : kExitIo;
}

struct ReportArgs {
  std::string samples;
  std::string label = "samples";
  std::vector<double> thresholds_ms{1000.0};
  bool field = false;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<Nanos> read_pairing_latencies(const std::string& text) {
  std::vector<Nanos> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("op_seq", 0) == 0) continue;
    const auto comma = line.rfind(',');
    try {
      out.push_back(std::stoll(line.substr(comma == std::string::npos ? 0 : comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::UnparseableLine, "bad pairing row", line_no);
    }
  }
  return out;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream&) {
  const auto th = thresholds_ns(a.thresholds_ms);
  if (a.field) {
    std::ostringstream table;
    table << "scenario,n,median_ms,iqr_ms,std_ms,over_1s_pct,ref_median_ms,ref_iqr_ms,ref_std_ms,ref_over_1s_pct\n";
    for (Preset p : kAllPresets) {
      auto cfg = preset(p);
      cfg.trials = a.trials;
      cfg.seed = a.seed;
      const auto sim = simulate(cfg);
      const auto result = analyze(sim.op_log, sim.veh_log, {}, cfg.label, th);
      const auto& s = result.report.stats;
      const auto ref = preset_targets(p);
      auto opt_ms = [](const std::optional<Nanos>& v) { return v ? std::to_string(*v / 1e6) : std::string("-"); };
      table << cfg.label << ',' << s.n << ',' << s.median_ns / 1e6 << ',' << s.iqr_ns / 1e6 << ','
            << s.std_ns / 1e6 << ',' << 100.0 * s.frac_over.at(kOneSecondNs) << ',' << ref.median_ns / 1e6 << ','
            << ref.iqr_ns / 1e6 << ',' << opt_ms(ref.std_ns) << ','
            << (ref.frac_over_1s ? std::to_string(100.0 * *ref.frac_over_1s) : std::string("-")) << '\n';
      if (!a.out.empty()) write_report_files((fs::path(a.out) / cfg.label).string(), result.report);
    }
    out << table.str();
    if (!a.out.empty()) write_file(fs::path(a.out) / "field.csv", table.str());
    return kExitOk;
  }
  if (a.samples.empty()) throw Error(ErrorCode::ConfigInvalid, "report needs --samples or --field");
  const auto latencies = read_pairing_latencies(read_file(a.samples));
  const auto report = build_report(a.label, latencies, {"-", "none", std::string(kToolVersion)}, th);
  out << render_report(report);
  if (!a.out.empty()) write_report_files(a.out, report);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion-to-motion latency measurement toolkit", "m2m"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate synthetic operator/vehicle logs");
  simulate_cmd->add_option("--preset", sim.preset, "static_wifi | static_5g | dyn_coref | dyn_auto");
  simulate_cmd->add_option("--config", sim.config, "INI scenario file");
  simulate_cmd->add_option("--trials", sim.trials, "Override trial count");
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed");
  simulate_cmd->add_option("--out", sim.out, "Output directory")->required();
  simulate_cmd->add_flag("--iid", sim.iid, "Independent draws instead of stratified");
  simulate_cmd->add_flag("--shared-pulse", sim.shared_pulse, "Write a shared-pulse precision run instead");
  simulate_cmd->add_option("--sync-mode", sim.sync_mode, "coref | auto (shared-pulse runs)");
  simulate_cmd->add_option("--pulses", sim.pulses, "Pulse count (shared-pulse runs)");
  simulate_cmd->add_option("--period-ms", sim.period_ms, "Pulse period (shared-pulse runs)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Pair operator and vehicle events and summarize M2M latency");
  analyze_cmd->add_option("--operator", an.op_path, "Operator log")->required();
  analyze_cmd->add_option("--vehicle", an.veh_path, "Vehicle log")->required();
  analyze_cmd->add_option("--format", an.format, "csv | kernel");
  analyze_cmd->add_flag("--lenient", an.lenient, "Skip and count malformed lines");
  analyze_cmd->add_option("--debounce-ms", an.debounce_ms);
  analyze_cmd->add_option("--min-latency-ms", an.min_latency_ms);
  analyze_cmd->add_option("--max-window-ms", an.max_window_ms);
  analyze_cmd->add_option("--threshold-ms", an.thresholds_ms, "Fraction-over thresholds");
  analyze_cmd->add_option("--label", an.label);
  analyze_cmd->add_option("--out", an.out, "Output file prefix");

  PrecisionArgs pr;
  auto* precision_cmd = app.add_subcommand("precision", "Shared-pulse clock offset analysis");
  precision_cmd->add_option("--node-a", pr.a_path)->required();
  precision_cmd->add_option("--node-b", pr.b_path)->required();
  precision_cmd->add_option("--format", pr.format, "csv | kernel");
  precision_cmd->add_option("--sched-a", pr.sched_a, "Scheduling latency samples, node a");
  precision_cmd->add_option("--sched-b", pr.sched_b, "Scheduling latency samples, node b");
  precision_cmd->add_option("--max-unmatched-pct", pr.max_unmatched_pct);
  precision_cmd->add_option("--out", pr.out, "Output directory");

  ProbeArgs pb;
  auto* probe_cmd = app.add_subcommand("probe", "Two-way datagram offset probe");
  probe_cmd->add_option("--listen", pb.listen, "host:port to answer on");
  probe_cmd->add_option("--peer", pb.peer, "host:port to query");
  probe_cmd->add_option("--count", pb.count);
  probe_cmd->add_option("--interval-ms", pb.interval_ms);
  probe_cmd->add_option("--timeout-ms", pb.timeout_ms);
  probe_cmd->add_option("--duration-s", pb.duration_s, "Responder-only run time, 0 = until interrupted");
  probe_cmd->add_option("--out", pb.out, "CSV of exchanges");

  BudgetArgs bu;
  auto* budget_cmd = app.add_subcommand("budget", "Measurement error budget");
  budget_cmd->add_option("--sync-ms", bu.sync_ms);
  budget_cmd->add_option("--kernel-ms", bu.kernel_ms);
  budget_cmd->add_option("--circuit-us", bu.circuit_us);
  budget_cmd->add_option("--calib-angle-deg", bu.calib_angle_deg);
  budget_cmd->add_option("--steer-rate-dps", bu.steer_rate_dps);
  budget_cmd->add_option("--sched-a", bu.sched_a, "Scheduling latency samples, node a");
  budget_cmd->add_option("--sched-b", bu.sched_b, "Scheduling latency samples, node b");
  budget_cmd->add_option("--out", bu.out, "Output file prefix");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Summarize a pairing CSV or reproduce the field scenarios");
  report_cmd->add_option("--samples", rp.samples, "Pairing CSV from analyze");
  report_cmd->add_option("--label", rp.label);
  report_cmd->add_option("--threshold-ms", rp.thresholds_ms);
  report_cmd->add_flag("--field", rp.field, "Simulate and analyze all four field presets");
  report_cmd->add_option("--trials", rp.trials);
  report_cmd->add_option("--seed", rp.seed);
  report_cmd->add_option("--out", rp.out, "Output prefix (samples) or directory (--field)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "m2m: usage-error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out, err);
    if (*analyze_cmd) return cmd_analyze(an, out, err);
    if (*precision_cmd) return cmd_precision(pr, out, err);
    if (*probe_cmd) return cmd_probe(pb, out, err);
    if (*budget_cmd) return cmd_budget(bu, out, err);
    if (*report_cmd) return cmd_report(rp, out, err);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) {
      err << "m2m: io-error: " << e.what() << '\n';
      return kExitIo;
    }
    err << "m2m: error[" << to_string(e.code()) << "]: " << e.what();
    if (e.line() > 0) err << " (line " << e.line() << ")";
    err << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace m2m::cli
