#include "m2m/clock.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "m2m/rng.hpp"

namespace m2m {

namespace {

constexpr std::uint64_t kPhaseStream = 0x70686173;
constexpr std::uint64_t kJitterStream = 1;
constexpr std::uint64_t kSpikeStream = 2;
constexpr std::uint64_t kSpikeSizeStream = 3;

// Discipline correction accumulated after the k-th step (k = 0 is the first
// step), where the undisciplined offset at step j is alpha + beta * j and
// each step pulls the correction toward it with gain g.
double accumulated_correction(double alpha, double beta, double g, double k) {
  const double r = 1.0 - g;
  if (r == 0.0) return alpha + beta * k;
  const double rk = std::pow(r, k);
  const double s0 = (1.0 - rk * r) / g;
  const double s1 = r * (1.0 - (k + 1.0) * rk + k * rk * r) / (g * g);
  return g * ((alpha + beta * k) * s0 - beta * s1);
}

}  // namespace

void ClockModel::validate() const {
  if (!(jitter_std_ns >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "jitter_std_ns must be >= 0");
  if (!(correction_gain > 0.0 && correction_gain <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "correction_gain must be in (0, 1]");
  }
  if (!(correction_interval_s > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "correction_interval_s must be positive");
  }
  if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "spike_prob must be in [0, 1]");
  }
  if (spike_max_ns < 0) throw Error(ErrorCode::ConfigInvalid, "spike_max_ns must be >= 0");
  if (!std::isfinite(drift_ppm)) throw Error(ErrorCode::ConfigInvalid, "drift_ppm must be finite");
}

const char* to_string(SyncMode mode) noexcept {
  return mode == SyncMode::CoReferenced ? "coref" : "auto";
}

SyncMode parse_sync_mode(std::string_view text) {
  if (text == "coref" || text == "co-referenced" || text == "CoReferenced") return SyncMode::CoReferenced;
  if (text == "auto" || text == "autonomous" || text == "Autonomous") return SyncMode::Autonomous;
  throw Error(ErrorCode::ConfigInvalid, "unknown sync mode '" + std::string(text) + "'");
}

// Both presets discipline each node with full-gain steps, so each node's error
// is a drift sawtooth; their difference is close to a symmetric triangle.
// Co-referenced: the vehicle follows the operator over the LAN and sees rare
// bounded spikes when a correction lands on a jittery exchange.
// Autonomous: both nodes follow public servers independently, with a slightly
// wider sawtooth and no spikes.
ClockPair ClockPair::preset(SyncMode mode) {
  ClockPair pair;
  if (mode == SyncMode::CoReferenced) {
    pair.operator_clock = {0, 11.5, 15'000.0, 64.0, 1.0, 0.0, 0};
    pair.vehicle_clock = {0, 10.1, 15'000.0, 73.0, 1.0, 0.05, 3'600'000};
  } else {
    pair.operator_clock = {0, 15.2, 20'000.0, 64.0, 1.0, 0.0, 0};
    pair.vehicle_clock = {0, 13.8, 20'000.0, 71.0, 1.0, 0.0, 0};
  }
  return pair;
}

Nanos sample_clock_error(const ClockModel& model, Nanos t_true_ns, std::uint64_t seed) {
  if (t_true_ns < 0) throw Error(ErrorCode::ConfigInvalid, "t_true_ns must be >= 0");
  const double drift = model.drift_ppm * 1e-6;
  const double t = static_cast<double>(t_true_ns);
  const auto free_offset = [&](double at) { return static_cast<double>(model.initial_offset_ns) + drift * at; };

  double offset = free_offset(t);
  if (std::isfinite(model.correction_interval_s)) {
    const double period = model.correction_interval_s * 1e9;
    const double phase = rng::to_unit(rng::mix(seed, kPhaseStream)) * period;
    if (t >= phase) {
      const double k = std::floor((t - phase) / period);
      offset -= accumulated_correction(free_offset(phase), drift * period, model.correction_gain, k);
    }
  }
  const auto key = static_cast<std::uint64_t>(t_true_ns);
  if (model.jitter_std_ns > 0.0) {
    offset += model.jitter_std_ns * rng::normal_from_key(rng::mix(seed, key, kJitterStream));
  }
  if (model.spike_prob > 0.0 && model.spike_max_ns > 0 &&
      rng::to_unit(rng::mix(seed, key, kSpikeStream)) < model.spike_prob) {
    const std::uint64_t bits = rng::mix(seed, key, kSpikeSizeStream);
    const double size = rng::to_unit(bits) * static_cast<double>(model.spike_max_ns);
    offset += (bits & 1U) ? size : -size;
  }
  return std::llround(offset);
}

namespace {

std::vector<const EventRecord*> pulse_records(const EventLog& log) {
  std::vector<const EventRecord*> out;
  for (const auto& r : log.records) {
    if (r.source == EventSource::SharedPulse) out.push_back(&r);
  }
  if (out.empty()) {
    for (const auto& r : log.records) out.push_back(&r);
  }
  return out;
}

}  // namespace

OffsetSeries precision_analysis(const EventLog& log_a, const EventLog& log_b, double max_unmatched_frac) {
  const auto a = pulse_records(log_a);
  const auto b = pulse_records(log_b);
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyLog, "precision analysis needs two non-empty logs");

  OffsetSeries series;
  std::unordered_map<std::uint64_t, const EventRecord*> b_by_seq;
  b_by_seq.reserve(b.size());
  for (const auto* r : b) b_by_seq.emplace(r->seq, r);
  std::size_t shared = 0;
  for (const auto* r : a) shared += b_by_seq.count(r->seq);

  // Logs stamped by the same pulse source share seq numbers; anything else is
  // matched positionally.
  const std::size_t longest = std::max(a.size(), b.size());
  if (shared * 2 >= std::min(a.size(), b.size())) {
    series.paired_by_seq = true;
    for (const auto* r : a) {
      auto it = b_by_seq.find(r->seq);
      if (it != b_by_seq.end()) series.samples.push_back({r->t_wall_ns, r->t_wall_ns - it->second->t_wall_ns});
    }
    series.unmatched = a.size() + b.size() - 2 * shared;
  } else {
    const std::size_t common = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < common; ++i) {
      series.samples.push_back({a[i]->t_wall_ns, a[i]->t_wall_ns - b[i]->t_wall_ns});
    }
    series.unmatched = longest - common;
  }
  if (series.samples.empty()) throw Error(ErrorCode::EmptyLog, "no common pulses");
  if (static_cast<double>(series.unmatched) > max_unmatched_frac * static_cast<double>(longest)) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(series.unmatched) + " of " + std::to_string(longest) + " pulses unmatched");
  }
  for (std::size_t i = 1; i < series.samples.size(); ++i) {
    if (series.samples[i].t_ref_ns <= series.samples[i - 1].t_ref_ns) {
      throw Error(ErrorCode::NonMonotonicTime, "reference times must be strictly increasing", i + 1);
    }
  }

  std::vector<Nanos> signed_offsets;
  std::vector<Nanos> abs_offsets;
  signed_offsets.reserve(series.samples.size());
  abs_offsets.reserve(series.samples.size());
  for (const auto& s : series.samples) {
    signed_offsets.push_back(s.offset_ns);
    abs_offsets.push_back(s.offset_ns < 0 ? -s.offset_ns : s.offset_ns);
  }
  series.signed_stats = summarize(signed_offsets);
  series.abs_stats = summarize(abs_offsets);
  return series;
}

std::string write_offset_csv(const OffsetSeries& series) {
  std::ostringstream out;
  out << "t_ref_ns,offset_ns\n";
  for (const auto& s : series.samples) out << s.t_ref_ns << ',' << s.offset_ns << '\n';
  return out.str();
}

SchedulingStats scheduling_stats(const NodeId& node, std::span<const Nanos> latencies_ns) {
  if (latencies_ns.empty()) throw Error(ErrorCode::EmptySample, "no scheduling latency samples");
  SchedulingStats s;
  s.node = node;
  const auto [lo, hi] = std::minmax_element(latencies_ns.begin(), latencies_ns.end());
  s.min_ns = *lo;
  s.max_ns = *hi;
  long double sum = 0.0L;
  for (Nanos x : latencies_ns) sum += static_cast<long double>(x);
  s.mean_ns = static_cast<double>(sum / static_cast<long double>(latencies_ns.size()));
  return s;
}

std::vector<Nanos> parse_latency_samples(std::string_view text) {
  std::vector<Nanos> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    // Accept `node,latency_ns` rows as well as bare values.
    if (auto comma = line.rfind(','); comma != std::string_view::npos) line = line.substr(comma + 1);
    Nanos v{};
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      if (out.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::UnparseableLine, "bad latency sample", line_no);
    }
    if (v < 0) throw Error(ErrorCode::UnparseableLine, "negative latency sample", line_no);
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::EmptySample, "no scheduling latency samples");
  return out;
}

Nanos kernel_asymmetry(const SchedulingStats& a, const SchedulingStats& b) {
  return std::max(a.max_ns - b.min_ns, b.max_ns - a.min_ns);
}

}  // namespace m2m
