#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "m2m/clock.hpp"
#include "m2m/delay_dist.hpp"
#include "m2m/event.hpp"

namespace m2m {

// Wall-clock origin of simulated runs (2023-11-14T22:13:20Z).
inline constexpr Nanos kSimEpochNs = 1'700'000'000 * kNanosPerSecond;

struct ScenarioConfig {
  std::string label = "custom";
  DelayDist l_gen;
  DelayDist l_network;
  DelayDist l_exec;
  DelayDist l_follow;
  DelayDist friction_extra;  // added only when stationary
  bool stationary = false;
  SyncMode sync_mode = SyncMode::CoReferenced;
  std::optional<ClockPair> clocks;  // overrides the sync-mode preset
  double trial_interval_s = 5.0;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  // Latin-hypercube draws per component instead of independent ones.
  bool stratified = true;

  void validate() const;
  ClockPair clock_pair() const { return clocks ? *clocks : ClockPair::preset(sync_mode); }
};

struct TrialTruth {
  std::size_t trial = 0;
  Nanos true_op_time_ns = 0;  // wall time of the operator motion
  Nanos l_gen_ns = 0;
  Nanos l_network_ns = 0;
  Nanos l_exec_ns = 0;
  Nanos l_follow_ns = 0;
  Nanos friction_ns = 0;
  Nanos true_total_ns = 0;
  Nanos clock_err_op_ns = 0;
  Nanos clock_err_veh_ns = 0;
  std::uint64_t op_seq = 0;
  std::uint64_t veh_seq = 0;

  friend bool operator==(const TrialTruth&, const TrialTruth&) = default;
};

struct GroundTruth {
  std::vector<TrialTruth> trials;
};

struct Simulation {
  EventLog op_log;
  EventLog veh_log;
  GroundTruth truth;
  std::vector<std::string> warnings;  // e.g. OverlappingTrials
};

// Trial i starts at true time i * trial_interval. The operator records
// start + clock_err_op(start); the vehicle records start + total +
// clock_err_veh(start + total). Deterministic in the config.
Simulation simulate(const ScenarioConfig& cfg);

std::string write_truth_csv(const GroundTruth& truth);

enum class Preset { StaticWifi, Static5g, DynCoref, DynAuto };

inline constexpr Preset kAllPresets[] = {Preset::StaticWifi, Preset::Static5g, Preset::DynCoref, Preset::DynAuto};

const char* to_string(Preset p) noexcept;
Preset parse_preset(std::string_view name);  // UnknownPreset

struct PresetTargets {
  Nanos median_ns = 0;
  Nanos iqr_ns = 0;
  std::optional<Nanos> std_ns;
  std::optional<double> frac_over_1s;
};

// Field statistics each preset is calibrated to.
PresetTargets preset_targets(Preset p);

// Fixed split: generation and execution 10 ms each, a lognormal network leg,
// friction of 163 ms when stationary; l_follow is then fitted so the total
// hits the preset's median and IQR.
ScenarioConfig preset(Preset p);
ScenarioConfig preset(std::string_view name);

// Fits l_follow (lognormal) so that the total delay of cfg has the requested
// median and IQR, using large common-random-number samples.
DelayDist calibrate_follow(const ScenarioConfig& cfg, Nanos target_median_ns, Nanos target_iqr_ns);

struct PulseRun {
  EventLog node_a;  // operator-side clock
  EventLog node_b;  // vehicle-side clock
};

// A single pulse train wired to both nodes: pulse i at i * period.
PulseRun simulate_shared_pulses(const ClockPair& clocks, std::size_t pulses, Nanos period_ns, std::uint64_t seed);

// Seeds of the two node clocks derived from a run seed.
std::uint64_t operator_clock_seed(std::uint64_t seed) noexcept;
std::uint64_t vehicle_clock_seed(std::uint64_t seed) noexcept;

// INI-style text: [scenario], [l_gen], [l_network], [l_exec], [l_follow],
// [friction_extra], optional [clock_operator] / [clock_vehicle].
ScenarioConfig scenario_from_ini(std::string_view text);
std::string scenario_to_ini(const ScenarioConfig& cfg);

// FNV-1a of the canonical INI text, 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace m2m
