#include <algorithm>

#include <gtest/gtest.h>

#include "m2m/pairing.hpp"
#include "m2m/sim.hpp"
#include "m2m/stats.hpp"

namespace m2m {
namespace {

constexpr Nanos ms = kNanosPerMilli;

ScenarioConfig constant_scenario(Nanos gen, Nanos net, Nanos exec, Nanos follow) {
  ScenarioConfig cfg;
  cfg.l_gen = DelayDist::constant(gen);
  cfg.l_network = DelayDist::constant(net);
  cfg.l_exec = DelayDist::constant(exec);
  cfg.l_follow = DelayDist::constant(follow);
  cfg.friction_extra = DelayDist::constant(163 * ms);
  cfg.clocks = ClockPair::ideal();
  cfg.trials = 50;
  return cfg;
}

TEST(Simulate, AllZeroGivesZeroLatency) {
  const auto sim = simulate(constant_scenario(0, 0, 0, 0));
  const auto r = pair_events(sim.op_log, sim.veh_log);
  ASSERT_EQ(r.samples.size(), 50u);
  for (Nanos x : r.latencies()) EXPECT_EQ(x, 0);
}

TEST(Simulate, ConstantChainSumsExactly) {
  const auto sim = simulate(constant_scenario(10 * ms, 50 * ms, 20 * ms, 700 * ms));
  const auto r = pair_events(sim.op_log, sim.veh_log);
  ASSERT_EQ(r.samples.size(), 50u);
  for (Nanos x : r.latencies()) EXPECT_EQ(x, 780 * ms);
}

TEST(Simulate, FrictionOnlyWhenStationary) {
  auto cfg = constant_scenario(10 * ms, 50 * ms, 20 * ms, 700 * ms);
  cfg.stationary = true;
  const auto sim = simulate(cfg);
  for (Nanos x : pair_events(sim.op_log, sim.veh_log).latencies()) EXPECT_EQ(x, 943 * ms);
  for (const auto& t : sim.truth.trials) EXPECT_EQ(t.friction_ns, 163 * ms);
  cfg.stationary = false;
  for (const auto& t : simulate(cfg).truth.trials) EXPECT_EQ(t.friction_ns, 0);
}

TEST(Simulate, DeterministicInConfig) {
  auto cfg = preset(Preset::DynAuto);
  cfg.trials = 200;
  const auto a = simulate(cfg);
  const auto b = simulate(cfg);
  EXPECT_EQ(a.op_log, b.op_log);
  EXPECT_EQ(a.veh_log, b.veh_log);
  EXPECT_EQ(write_truth_csv(a.truth), write_truth_csv(b.truth));
  cfg.seed = 2;
  EXPECT_NE(simulate(cfg).veh_log, a.veh_log);
}

TEST(Simulate, GroundTruthClosesRecordedTimes) {
  for (Preset p : kAllPresets) {
    auto cfg = preset(p);
    cfg.trials = 300;
    const auto sim = simulate(cfg);
    ASSERT_NO_THROW(sim.op_log.validate());
    ASSERT_NO_THROW(sim.veh_log.validate());
    for (const auto& t : sim.truth.trials) {
      EXPECT_EQ(t.true_total_ns, t.l_gen_ns + t.l_network_ns + t.l_exec_ns + t.l_follow_ns + t.friction_ns);
      const auto& op = sim.op_log.records.at(t.op_seq);
      const auto& veh = sim.veh_log.records.at(t.veh_seq);
      EXPECT_EQ(op.t_wall_ns, t.true_op_time_ns + t.clock_err_op_ns);
      EXPECT_EQ(veh.t_wall_ns - op.t_wall_ns, t.true_total_ns + t.clock_err_veh_ns - t.clock_err_op_ns);
    }
  }
}

TEST(Simulate, ScalingADelayNeverShortensATrial) {
  auto cfg = preset(Preset::Static5g);
  cfg.trials = 300;
  cfg.clocks = ClockPair::ideal();
  const auto base = simulate(cfg);
  cfg.l_network = cfg.l_network.scaled(1.7);
  const auto slower = simulate(cfg);
  for (std::size_t i = 0; i < base.truth.trials.size(); ++i) {
    EXPECT_GE(slower.truth.trials[i].true_total_ns, base.truth.trials[i].true_total_ns);
  }
}

TEST(Simulate, OverlappingTrialsWarning) {
  auto cfg = constant_scenario(0, 0, 0, 2 * kNanosPerSecond);
  cfg.trial_interval_s = 2.0;
  const auto sim = simulate(cfg);
  ASSERT_EQ(sim.warnings.size(), 1u);
  EXPECT_EQ(sim.warnings[0].rfind("OverlappingTrials", 0), 0u);
  cfg.trial_interval_s = 5.0;
  EXPECT_TRUE(simulate(cfg).warnings.empty());
}

TEST(Simulate, RejectsBadConfig) {
  auto cfg = constant_scenario(0, 0, 0, 0);
  cfg.trials = 0;
  EXPECT_THROW(simulate(cfg), Error);
  cfg.trials = 1;
  cfg.trial_interval_s = 0.0;
  EXPECT_THROW(simulate(cfg), Error);
}

TEST(Simulate, MetaCarriesProvenance) {
  auto cfg = preset(Preset::DynCoref);
  cfg.trials = 5;
  const auto sim = simulate(cfg);
  EXPECT_EQ(sim.op_log.meta.at("scenario"), "dyn_coref");
  EXPECT_EQ(sim.op_log.meta.at("config_hash"), config_hash(cfg));
  EXPECT_EQ(sim.op_log.meta.at("config_hash").size(), 16u);
}

TEST(Presets, NamesAndErrors) {
  for (Preset p : kAllPresets) EXPECT_EQ(parse_preset(to_string(p)), p);
  try {
    preset("static_lte");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPreset);
  }
  EXPECT_TRUE(preset(Preset::StaticWifi).stationary);
  EXPECT_FALSE(preset(Preset::DynCoref).stationary);
  EXPECT_EQ(preset(Preset::DynAuto).sync_mode, SyncMode::Autonomous);
  EXPECT_EQ(preset(Preset::DynCoref).sync_mode, SyncMode::CoReferenced);
}

TEST(Presets, DynamicCoReferencedMedianNearTarget) {
  auto cfg = preset(Preset::DynCoref);
  cfg.trials = 500;
  const auto sim = simulate(cfg);
  const auto r = pair_events(sim.op_log, sim.veh_log);
  ASSERT_EQ(r.samples.size(), 500u);
  const auto s = summarize(r.latencies());
  EXPECT_NEAR(s.median_ns, 767.8e6, 15e6);
}

TEST(ScenarioIni, RoundTrip) {
  for (Preset p : kAllPresets) {
    auto cfg = preset(p);
    cfg.seed = 99;
    const auto text = scenario_to_ini(cfg);
    const auto back = scenario_from_ini(text);
    EXPECT_EQ(back.label, cfg.label);
    EXPECT_EQ(back.l_gen, cfg.l_gen);
    EXPECT_EQ(back.l_network, cfg.l_network);
    EXPECT_EQ(back.l_exec, cfg.l_exec);
    EXPECT_EQ(back.l_follow, cfg.l_follow);
    EXPECT_EQ(back.friction_extra, cfg.friction_extra);
    EXPECT_EQ(back.stationary, cfg.stationary);
    EXPECT_EQ(back.sync_mode, cfg.sync_mode);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(scenario_to_ini(back), text);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
}

TEST(ScenarioIni, HandWrittenConfig) {
  const auto cfg = scenario_from_ini(
      "[scenario]\nlabel = bench\ntrials = 10\nseed = 3\n"
      "[l_gen]\nkind = constant\nvalue_ms = 10\n"
      "[l_network]\nkind = lognormal\nmedian_ms = 20\niqr_ms = 12\n"
      "[l_exec]\nkind = constant\nvalue_ns = 10000000\n"
      "[l_follow]\nkind = gamma\nshape = 4\nscale_ns = 1e8\n"
      "[clock_operator]\ndrift_ppm = 1.5\n");
  EXPECT_EQ(cfg.label, "bench");
  EXPECT_EQ(cfg.trials, 10u);
  EXPECT_EQ(cfg.l_gen.constant_ns(), 10 * ms);
  EXPECT_NEAR(cfg.l_network.median_ns(), 20e6, 1.0);
  EXPECT_EQ(cfg.l_follow.kind(), DelayKind::Gamma);
  ASSERT_TRUE(cfg.clocks.has_value());
  EXPECT_DOUBLE_EQ(cfg.clocks->operator_clock.drift_ppm, 1.5);
  EXPECT_THROW(scenario_from_ini("[l_gen]\nkind = weird\n"), Error);
}

TEST(SharedPulses, SameSeqOnBothNodes) {
  const auto run = simulate_shared_pulses(ClockPair::ideal(), 10, 500 * ms, 1);
  ASSERT_EQ(run.node_a.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(run.node_a.records[i].seq, run.node_b.records[i].seq);
    EXPECT_EQ(run.node_a.records[i].t_wall_ns, run.node_b.records[i].t_wall_ns);
    EXPECT_EQ(run.node_a.records[i].source, EventSource::SharedPulse);
  }
  EXPECT_NE(operator_clock_seed(1), vehicle_clock_seed(1));
}

}  // namespace
}  // namespace m2m
