#include <random>

#include <gtest/gtest.h>

#include "m2m/error_budget.hpp"

namespace m2m {
namespace {

TEST(CalibError, WorkedExamples) {
  EXPECT_EQ(calib_error({1.0, 100.0}), 10'000'000);
  EXPECT_EQ(calib_error({0.0, 100.0}), 0);
  EXPECT_EQ(calib_error({2.0, 100.0}), 20'000'000);
  EXPECT_EQ(calib_error({1.0, 50.0}), 20'000'000);
}

TEST(CalibError, ProportionalToAngleOverRate) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, 10.0), rate(1.0, 500.0), k(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = angle(rng), w = rate(rng), s = k(rng);
    const Nanos base = calib_error({a, w});
    EXPECT_NEAR(static_cast<double>(base), a / w * 1e9, 0.5 + 1e-6);
    // homogeneous of degree zero, up to the final rounding
    EXPECT_LE(std::abs(calib_error({a * s, w * s}) - base), 1);
  }
}

TEST(CalibError, RejectsBadInputs) {
  try {
    calib_error({1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroRate);
  }
  EXPECT_THROW(calib_error({1.0, -5.0}), Error);
  EXPECT_THROW(calib_error({-1.0, 100.0}), Error);
}

TEST(TotalError, CoReferencedExample) {
  const auto b = total_error(322'000, 2'000, 5'000, 10'000'000);
  EXPECT_EQ(b.e_total_ns, 10'329'000);
  EXPECT_TRUE(b.in_precision_band);
}

TEST(TotalError, WorstCaseExample) {
  const auto b = total_error(4'446'000, 2'000, 116'000, 10'000'000);
  EXPECT_EQ(b.e_total_ns, 14'564'000);
  EXPECT_TRUE(b.in_precision_band);
}

TEST(TotalError, BandEdgesInclusive) {
  EXPECT_TRUE(total_error(0, 0, 0, kPrecisionBandLoNs).in_precision_band);
  EXPECT_TRUE(total_error(0, 0, 0, kPrecisionBandHiNs).in_precision_band);
  EXPECT_FALSE(total_error(0, 0, 0, kPrecisionBandLoNs - 1).in_precision_band);
  EXPECT_FALSE(total_error(0, 0, 1, kPrecisionBandHiNs).in_precision_band);
}

TEST(TotalError, NegativeComponentRejected) {
  for (int i = 0; i < 4; ++i) {
    Nanos c[4] = {1, 1, 1, 1};
    c[i] = -1;
    try {
      total_error(c[0], c[1], c[2], c[3]);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NegativeComponent);
    }
  }
}

TEST(TotalError, SumIsOrderIndependent) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<Nanos> d(0, 20 * kNanosPerMilli);
  for (int i = 0; i < 500; ++i) {
    Nanos c[4] = {d(rng), d(rng), d(rng), d(rng)};
    const auto base = total_error(c[0], c[1], c[2], c[3]).e_total_ns;
    EXPECT_EQ(base, c[0] + c[1] + c[2] + c[3]);
    EXPECT_EQ(total_error(c[3], c[2], c[1], c[0]).e_total_ns, base);
    EXPECT_EQ(total_error(c[1], c[3], c[0], c[2]).e_total_ns, base);
  }
}

TEST(TotalError, Rendering) {
  const auto b = total_error(322'000, 2'000, 5'000, 10'000'000);
  const auto kv = budget_key_values(b);
  EXPECT_NE(kv.find("e_total_ns=10329000"), std::string::npos);
  EXPECT_NE(budget_csv_header().find("e_total_ns"), std::string::npos);
  EXPECT_NE(budget_csv_row(b).find("10329000"), std::string::npos);
}

}  // namespace
}  // namespace m2m
