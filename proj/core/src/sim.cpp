#include "m2m/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "m2m/rng.hpp"

namespace m2m {

namespace {

enum Stream : std::uint64_t {
  kGenStream = 11,
  kNetworkStream = 12,
  kExecStream = 13,
  kFollowStream = 14,
  kFrictionStream = 15,
};

constexpr Nanos kGenNs = 10 * kNanosPerMilli;
constexpr Nanos kExecNs = 10 * kNanosPerMilli;
constexpr Nanos kFrictionNs = 163 * kNanosPerMilli;

// n uniforms in (0, 1). Stratified: one per stratum [k/n, (k+1)/n), strata in
// random order.
std::vector<double> component_uniforms(std::size_t n, std::uint64_t seed, std::uint64_t stream, bool stratified) {
  rng::SplitMix64 gen(rng::mix(seed, stream));
  std::vector<double> u(n);
  if (!stratified) {
    for (auto& x : u) x = gen.open_uniform();
    return u;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(gen.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  const auto dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (static_cast<double>(order[i]) + gen.open_uniform()) / dn;
  return u;
}

void sort_log(EventLog& log) {
  std::stable_sort(log.records.begin(), log.records.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.t_wall_ns < b.t_wall_ns; });
}

double quantile_unsorted(std::vector<double>& v, double p) {
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

}  // namespace

std::uint64_t operator_clock_seed(std::uint64_t seed) noexcept { return rng::mix(seed, 0x6f70); }
std::uint64_t vehicle_clock_seed(std::uint64_t seed) noexcept { return rng::mix(seed, 0x7665); }

void ScenarioConfig::validate() const {
  if (!(trial_interval_s > 0.0) || !std::isfinite(trial_interval_s)) {
    throw Error(ErrorCode::ConfigInvalid, "trial_interval_s must be positive");
  }
  if (trials == 0) throw Error(ErrorCode::ConfigInvalid, "trials must be positive");
  if (clocks) {
    clocks->operator_clock.validate();
    clocks->vehicle_clock.validate();
  }
}

Simulation simulate(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.trials;
  const auto u_gen = component_uniforms(n, cfg.seed, kGenStream, cfg.stratified);
  const auto u_net = component_uniforms(n, cfg.seed, kNetworkStream, cfg.stratified);
  const auto u_exec = component_uniforms(n, cfg.seed, kExecStream, cfg.stratified);
  const auto u_follow = component_uniforms(n, cfg.seed, kFollowStream, cfg.stratified);
  const auto u_friction = component_uniforms(n, cfg.seed, kFrictionStream, cfg.stratified);

  const ClockPair clocks = cfg.clock_pair();
  const auto op_seed = operator_clock_seed(cfg.seed);
  const auto veh_seed = vehicle_clock_seed(cfg.seed);
  const auto interval_ns = std::llround(cfg.trial_interval_s * 1e9);

  Simulation sim;
  sim.op_log.node = NodeId::operator_node();
  sim.veh_log.node = NodeId::vehicle_node();
  sim.truth.trials.reserve(n);
  std::size_t overlapping = 0;

  for (std::size_t i = 0; i < n; ++i) {
    TrialTruth t;
    t.trial = i;
    const Nanos start = static_cast<Nanos>(i) * interval_ns;
    t.true_op_time_ns = kSimEpochNs + start;
    t.l_gen_ns = cfg.l_gen.draw(u_gen[i]);
    t.l_network_ns = cfg.l_network.draw(u_net[i]);
    t.l_exec_ns = cfg.l_exec.draw(u_exec[i]);
    t.l_follow_ns = cfg.l_follow.draw(u_follow[i]);
    t.friction_ns = cfg.stationary ? cfg.friction_extra.draw(u_friction[i]) : 0;
    t.true_total_ns = t.l_gen_ns + t.l_network_ns + t.l_exec_ns + t.l_follow_ns + t.friction_ns;
    t.clock_err_op_ns = sample_clock_error(clocks.operator_clock, start, op_seed);
    t.clock_err_veh_ns = sample_clock_error(clocks.vehicle_clock, start + t.true_total_ns, veh_seed);
    if (t.true_total_ns >= interval_ns) ++overlapping;

    sim.op_log.records.push_back(
        {sim.op_log.node, i, t.true_op_time_ns + t.clock_err_op_ns, std::nullopt, EventSource::Synthetic});
    sim.veh_log.records.push_back({sim.veh_log.node, i,
                                   t.true_op_time_ns + t.true_total_ns + t.clock_err_veh_ns, std::nullopt,
                                   EventSource::Synthetic});
    sim.truth.trials.push_back(t);
  }

  // Records carry their trial index in seq until sorted; then seq becomes the
  // position in the log.
  sort_log(sim.op_log);
  sort_log(sim.veh_log);
  for (std::size_t k = 0; k < n; ++k) {
    sim.truth.trials[sim.op_log.records[k].seq].op_seq = k;
    sim.op_log.records[k].seq = k;
    sim.truth.trials[sim.veh_log.records[k].seq].veh_seq = k;
    sim.veh_log.records[k].seq = k;
  }

  for (auto* log : {&sim.op_log, &sim.veh_log}) {
    log->meta["scenario"] = cfg.label;
    log->meta["seed"] = std::to_string(cfg.seed);
    log->meta["sync_mode"] = to_string(cfg.sync_mode);
    log->meta["config_hash"] = config_hash(cfg);
  }
  if (overlapping > 0) {
    sim.warnings.push_back("OverlappingTrials: " + std::to_string(overlapping) +
                           " trials have a total delay at least as long as the trial interval");
  }
  return sim;
}

std::string write_truth_csv(const GroundTruth& truth) {
  std::ostringstream out;
  out << "trial,true_op_time_ns,l_gen_ns,l_network_ns,l_exec_ns,l_follow_ns,friction_ns,true_total_ns,"
         "clock_err_op_ns,clock_err_veh_ns,op_seq,veh_seq\n";
  for (const auto& t : truth.trials) {
    out << t.trial << ',' << t.true_op_time_ns << ',' << t.l_gen_ns << ',' << t.l_network_ns << ','
        << t.l_exec_ns << ',' << t.l_follow_ns << ',' << t.friction_ns << ',' << t.true_total_ns << ','
        << t.clock_err_op_ns << ',' << t.clock_err_veh_ns << ',' << t.op_seq << ',' << t.veh_seq << '\n';
  }
  return out.str();
}

const char* to_string(Preset p) noexcept {
  switch (p) {
    case Preset::StaticWifi: return "static_wifi";
    case Preset::Static5g: return "static_5g";
    case Preset::DynCoref: return "dyn_coref";
    case Preset::DynAuto: return "dyn_auto";
  }
  return "static_wifi";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : kAllPresets) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

PresetTargets preset_targets(Preset p) {
  switch (p) {
    case Preset::StaticWifi: return {874'500'000, 198'000'000, 126'800'000, std::nullopt};
    case Preset::Static5g: return {930'600'000, 105'000'000, 95'800'000, std::nullopt};
    case Preset::DynCoref: return {767'800'000, 141'700'000, std::nullopt, 0.014};
    case Preset::DynAuto: return {815'200'000, 145'900'000, std::nullopt, 0.054};
  }
  return {};
}

DelayDist calibrate_follow(const ScenarioConfig& cfg, Nanos target_median_ns, Nanos target_iqr_ns) {
  constexpr std::size_t kSamples = 100'000;
  constexpr int kIterations = 40;
  const std::uint64_t seed = 0xca11b;

  const auto u_gen = component_uniforms(kSamples, seed, kGenStream, true);
  const auto u_net = component_uniforms(kSamples, seed, kNetworkStream, true);
  const auto u_exec = component_uniforms(kSamples, seed, kExecStream, true);
  const auto u_friction = component_uniforms(kSamples, seed, kFrictionStream, true);
  std::vector<double> base(kSamples);
  std::vector<double> z(kSamples);
  const boost::math::normal standard;
  for (std::size_t i = 0; i < kSamples; ++i) {
    base[i] = static_cast<double>(cfg.l_gen.draw(u_gen[i]) + cfg.l_network.draw(u_net[i]) +
                                  cfg.l_exec.draw(u_exec[i]) +
                                  (cfg.stationary ? cfg.friction_extra.draw(u_friction[i]) : 0));
    z[i] = boost::math::quantile(standard, (static_cast<double>(i) + 0.5) / static_cast<double>(kSamples));
  }
  std::vector<double> scratch = base;
  const double base_median = quantile_unsorted(scratch, 0.5);

  double median = static_cast<double>(target_median_ns) - base_median;
  double iqr = static_cast<double>(target_iqr_ns);
  if (median <= 0.0) throw Error(ErrorCode::Unfittable, "fixed components already exceed the target median");
  std::vector<double> total(kSamples);
  DelayDist follow;
  for (int it = 0; it < kIterations; ++it) {
    follow = DelayDist::lognormal(std::log(median), std::asinh(iqr / (2.0 * median)) / 0.6744897501960817);
    for (std::size_t i = 0; i < kSamples; ++i) total[i] = base[i] + std::exp(follow.mu() + follow.sigma() * z[i]);
    const double got_median = quantile_unsorted(total, 0.5);
    const double got_iqr = quantile_unsorted(total, 0.75) - quantile_unsorted(total, 0.25);
    median += static_cast<double>(target_median_ns) - got_median;
    iqr *= static_cast<double>(target_iqr_ns) / got_iqr;
    if (median <= 0.0 || !(iqr > 0.0)) throw Error(ErrorCode::Unfittable, "follow calibration diverged");
  }
  return follow;
}

ScenarioConfig preset(Preset p) {
  ScenarioConfig cfg;
  cfg.label = to_string(p);
  cfg.l_gen = DelayDist::constant(kGenNs);
  cfg.l_exec = DelayDist::constant(kExecNs);
  cfg.friction_extra = DelayDist::constant(kFrictionNs);
  const bool wifi = p == Preset::StaticWifi;
  cfg.l_network = wifi ? fit_delay_dist(DelayKind::LogNormal, 20 * kNanosPerMilli, 12 * kNanosPerMilli)
                       : fit_delay_dist(DelayKind::LogNormal, 45 * kNanosPerMilli, 30 * kNanosPerMilli);
  cfg.stationary = p == Preset::StaticWifi || p == Preset::Static5g;
  cfg.sync_mode = p == Preset::DynAuto ? SyncMode::Autonomous : SyncMode::CoReferenced;
  cfg.trial_interval_s = 5.0;
  cfg.trials = 1000;
  cfg.seed = 1;
  const auto targets = preset_targets(p);
  cfg.l_follow = calibrate_follow(cfg, targets.median_ns, targets.iqr_ns);
  return cfg;
}

ScenarioConfig preset(std::string_view name) { return preset(parse_preset(name)); }

PulseRun simulate_shared_pulses(const ClockPair& clocks, std::size_t pulses, Nanos period_ns, std::uint64_t seed) {
  clocks.operator_clock.validate();
  clocks.vehicle_clock.validate();
  if (period_ns <= 0) throw Error(ErrorCode::ConfigInvalid, "pulse period must be positive");
  PulseRun run;
  run.node_a.node = {"node_a", Role::Operator};
  run.node_b.node = {"node_b", Role::Vehicle};
  const auto seed_a = operator_clock_seed(seed);
  const auto seed_b = vehicle_clock_seed(seed);
  for (std::size_t i = 0; i < pulses; ++i) {
    const Nanos t = static_cast<Nanos>(i) * period_ns;
    run.node_a.records.push_back({run.node_a.node, i, kSimEpochNs + t + sample_clock_error(clocks.operator_clock, t, seed_a),
                                  std::nullopt, EventSource::SharedPulse});
    run.node_b.records.push_back({run.node_b.node, i, kSimEpochNs + t + sample_clock_error(clocks.vehicle_clock, t, seed_b),
                                  std::nullopt, EventSource::SharedPulse});
  }
  return run;
}

}  // namespace m2m
