#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "m2m/clock.hpp"
#include "m2m/sim.hpp"
#include "oracles.hpp"

namespace m2m {
namespace {

TEST(ClockModel, ZeroModelIsExact) {
  const ClockModel zero;
  for (Nanos t : {Nanos{0}, Nanos{1}, kNanosPerSecond, 3600 * kNanosPerSecond}) {
    EXPECT_EQ(sample_clock_error(zero, t, 99), 0);
  }
}

TEST(ClockModel, OnePpmForOneSecond) {
  ClockModel m;
  m.drift_ppm = 1.0;
  m.correction_interval_s = ClockModel::kFreeRunning;
  EXPECT_EQ(sample_clock_error(m, kNanosPerSecond, 3), 1000);
  EXPECT_EQ(sample_clock_error(m, 10 * kNanosPerSecond, 3), 10'000);
}

TEST(ClockModel, FullGainRemovesInitialOffsetAfterFirstStep) {
  ClockModel m;
  m.initial_offset_ns = 5 * kNanosPerMilli;
  m.correction_interval_s = 1.0;
  // The first step lands within the first interval.
  EXPECT_EQ(sample_clock_error(m, 0, 11), 5 * kNanosPerMilli);
  for (Nanos t = kNanosPerSecond; t < 20 * kNanosPerSecond; t += 333 * kNanosPerMilli) {
    EXPECT_EQ(sample_clock_error(m, t, 11), 0);
  }
}

TEST(ClockModel, DisciplineStepsFollowFirstOrderPull) {
  ClockModel m;
  m.initial_offset_ns = 2 * kNanosPerMilli;
  m.drift_ppm = 50.0;
  m.correction_interval_s = 2.0;
  m.correction_gain = 0.3;
  // Scan at 1 ms; a step shows up as a drop, and each drop must leave
  // (1 - gain) of the offset just before it.
  Nanos prev = sample_clock_error(m, 0, 4);
  int steps = 0;
  for (Nanos t = kNanosPerMilli; t < 40 * kNanosPerSecond; t += kNanosPerMilli) {
    const Nanos cur = sample_clock_error(m, t, 4);
    if (cur < prev) {
      ++steps;
      // pre-step offset extrapolated to the step instant is within one
      // drift increment (50 ns per ms) of prev
      const double expected = (1.0 - m.correction_gain) * static_cast<double>(prev);
      EXPECT_NEAR(static_cast<double>(cur), expected, 60.0) << "t=" << t;
    } else {
      EXPECT_NEAR(static_cast<double>(cur - prev), 50.0, 1.0) << "t=" << t;
    }
    prev = cur;
  }
  EXPECT_EQ(steps, 20);
}

TEST(ClockModel, SteadyStateSawtoothBounds) {
  ClockModel m;
  m.drift_ppm = 10.0;
  m.correction_interval_s = 10.0;
  m.correction_gain = 0.5;
  // drift * T = 100 us; steady range [(1-g) dT / g, dT / g] = [100, 200] us
  Nanos lo = INT64_MAX, hi = INT64_MIN;
  for (Nanos t = 600 * kNanosPerSecond; t < 700 * kNanosPerSecond; t += 10 * kNanosPerMilli) {
    const Nanos e = sample_clock_error(m, t, 8);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  EXPECT_NEAR(static_cast<double>(lo), 100'000.0, 200.0);
  EXPECT_NEAR(static_cast<double>(hi), 200'000.0, 200.0);
}

TEST(ClockModel, PureFunctionOfModelTimeAndSeed) {
  for (SyncMode mode : {SyncMode::CoReferenced, SyncMode::Autonomous}) {
    const auto pair = ClockPair::preset(mode);
    for (Nanos t = 0; t < 600 * kNanosPerSecond; t += 7919 * kNanosPerMilli) {
      EXPECT_EQ(sample_clock_error(pair.vehicle_clock, t, 42), sample_clock_error(pair.vehicle_clock, t, 42));
    }
  }
  const auto m = ClockPair::preset(SyncMode::Autonomous).operator_clock;
  int differ = 0;
  for (Nanos t = 0; t < 100 * kNanosPerSecond; t += kNanosPerSecond) {
    differ += sample_clock_error(m, t, 1) != sample_clock_error(m, t, 2);
  }
  EXPECT_GT(differ, 90);
}

TEST(ClockModel, SpikesAreBounded) {
  ClockModel m;
  m.spike_prob = 0.5;
  m.spike_max_ns = 1000;
  int spikes = 0;
  for (Nanos t = 0; t < 10'000; ++t) {
    const Nanos e = sample_clock_error(m, t, 5);
    EXPECT_LE(std::abs(e), 1000);
    spikes += e != 0;
  }
  EXPECT_NEAR(spikes, 5000, 300);
}

TEST(ClockModel, ValidateRejectsBadParameters) {
  ClockModel m;
  m.correction_gain = 0.0;
  EXPECT_THROW(m.validate(), Error);
  m = {};
  m.jitter_std_ns = -1.0;
  EXPECT_THROW(m.validate(), Error);
  m = {};
  m.spike_max_ns = -5;
  EXPECT_THROW(m.validate(), Error);
  m = {};
  m.correction_interval_s = 0.0;
  EXPECT_THROW(m.validate(), Error);
  EXPECT_THROW(sample_clock_error(ClockModel{}, -1, 0), Error);
}

EventLog pulses(const NodeId& node, std::vector<Nanos> t) { return oracle::make_log(node, t, EventSource::SharedPulse); }

TEST(PrecisionAnalysis, IdenticalLogsGiveZero) {
  const std::vector<Nanos> t = {1'000, 500'001'000, 1'000'003'000};
  const auto s = precision_analysis(pulses(NodeId::operator_node(), t), pulses(NodeId::vehicle_node(), t));
  ASSERT_EQ(s.samples.size(), 3u);
  EXPECT_TRUE(s.paired_by_seq);
  EXPECT_EQ(s.abs_stats.max_ns, 0);
  EXPECT_DOUBLE_EQ(s.signed_stats.mean_ns, 0.0);
  EXPECT_DOUBLE_EQ(s.signed_stats.std_ns, 0.0);
}

TEST(PrecisionAnalysis, ShiftedLogGivesConstantNegativeOffset) {
  std::vector<Nanos> ta, tb;
  for (int i = 0; i < 100; ++i) {
    ta.push_back(kSimEpochNs + i * 500 * kNanosPerMilli);
    tb.push_back(ta.back() + 5 * kNanosPerMilli);
  }
  const auto s = precision_analysis(pulses(NodeId::operator_node(), ta), pulses(NodeId::vehicle_node(), tb));
  for (const auto& x : s.samples) EXPECT_EQ(x.offset_ns, -5 * kNanosPerMilli);
  EXPECT_DOUBLE_EQ(s.signed_stats.mean_ns, -5e6);
  EXPECT_DOUBLE_EQ(s.abs_stats.mean_ns, 5e6);
}

TEST(PrecisionAnalysis, SwappingLogsNegatesOffsets) {
  const auto run = simulate_shared_pulses(ClockPair::preset(SyncMode::CoReferenced), 500, 500 * kNanosPerMilli, 3);
  const auto ab = precision_analysis(run.node_a, run.node_b);
  const auto ba = precision_analysis(run.node_b, run.node_a);
  ASSERT_EQ(ab.samples.size(), ba.samples.size());
  for (std::size_t i = 0; i < ab.samples.size(); ++i) EXPECT_EQ(ab.samples[i].offset_ns, -ba.samples[i].offset_ns);
  EXPECT_EQ(ab.abs_stats.mean_ns, ba.abs_stats.mean_ns);
}

TEST(PrecisionAnalysis, PairsByOrderWithoutSharedSeq) {
  auto a = pulses(NodeId::operator_node(), {100, 200, 300});
  auto b = pulses(NodeId::vehicle_node(), {90, 190, 290});
  for (auto& r : b.records) r.seq += 1000;
  const auto s = precision_analysis(a, b);
  EXPECT_FALSE(s.paired_by_seq);
  for (const auto& x : s.samples) EXPECT_EQ(x.offset_ns, 10);
}

TEST(PrecisionAnalysis, LengthMismatchBeyondOnePercent) {
  std::vector<Nanos> ta, tb;
  for (int i = 0; i < 200; ++i) ta.push_back(1 + i * 1000);
  tb = ta;
  tb.resize(198);  // exactly 1% missing is tolerated
  EXPECT_NO_THROW(precision_analysis(pulses(NodeId::operator_node(), ta), pulses(NodeId::vehicle_node(), tb)));
  tb.resize(197);
  try {
    precision_analysis(pulses(NodeId::operator_node(), ta), pulses(NodeId::vehicle_node(), tb));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(PrecisionAnalysis, OnlyPulseRecordsAreCompared) {
  auto a = pulses(NodeId::operator_node(), {100, 200, 300});
  a.records[1].source = EventSource::HallEdge;
  auto b = pulses(NodeId::vehicle_node(), {100, 200, 300});
  b.records[1].source = EventSource::HallEdge;
  EXPECT_EQ(precision_analysis(a, b).samples.size(), 2u);
}

TEST(PrecisionAnalysis, OffsetCsv) {
  const auto s = precision_analysis(pulses(NodeId::operator_node(), {100, 200}), pulses(NodeId::vehicle_node(), {90, 230}));
  EXPECT_EQ(write_offset_csv(s), "t_ref_ns,offset_ns\n100,10\n200,-30\n");
}

SchedulingStats stats(Nanos min, Nanos max) { return {NodeId::operator_node(), min, max, 0.5 * (min + max)}; }

TEST(KernelAsymmetry, WorstCaseCombination) {
  EXPECT_EQ(kernel_asymmetry(stats(2'000, 62'000), stats(2'000, 62'000)), 60'000);
  // autonomous row: max(118 - 2, 106 - 2) us
  EXPECT_EQ(kernel_asymmetry(stats(2'000, 118'000), stats(2'000, 106'000)), 116'000);
  // co-referenced row: max(62 - 3, 52 - 2) us
  EXPECT_EQ(kernel_asymmetry(stats(2'000, 62'000), stats(3'000, 52'000)), 59'000);
}

TEST(SchedulingStats, FromSampleText) {
  const auto samples = parse_latency_samples("latency_ns\n2000\n5000\n# gap\n8000\n");
  const auto s = scheduling_stats(NodeId::vehicle_node(), samples);
  EXPECT_EQ(s.min_ns, 2000);
  EXPECT_EQ(s.max_ns, 8000);
  EXPECT_DOUBLE_EQ(s.mean_ns, 5000.0);
  EXPECT_EQ(parse_latency_samples("rpi1,10\nrpi1,20\n").size(), 2u);
  EXPECT_THROW(parse_latency_samples("10\nabc\n"), Error);
  EXPECT_THROW(parse_latency_samples(""), Error);
}

}  // namespace
}  // namespace m2m
