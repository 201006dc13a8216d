#include <gtest/gtest.h>

#include <cmath>

#include "codednfv/channel.hpp"

namespace codednfv {
namespace {

// Parity probability by summing over all 2^d noise patterns.
double parity_probability_brute_force(double p, std::size_t d) {
  double total = 0.0;
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << d); ++z) {
    const int ones = std::popcount(z);
    if (ones % 2 == 1) total += std::pow(p, ones) * std::pow(1.0 - p, static_cast<int>(d) - ones);
  }
  return total;
}

TEST(Noise, DegenerateCrossoverProbabilities) {
  RngStream rng(1, 0, StreamPurpose::Noise);
  EXPECT_TRUE(sample_noise(BscChannel(0.0), 1000, rng).is_zero());
  EXPECT_EQ(sample_noise(BscChannel(1.0), 1000, rng), BitVec::ones(1000));
}

TEST(Noise, OnesFractionConcentratesAtP) {
  RngStream rng(2, 0, StreamPurpose::Noise);
  const std::size_t len = 1'000'000;
  const double p = 0.05;
  const double rate = static_cast<double>(sample_noise(BscChannel(p), len, rng).weight()) / len;
  EXPECT_NEAR(rate, p, 3.0 * std::sqrt(p * (1 - p) / len));
}

TEST(Noise, XorOfTwoNoiseVectorsHasEffectiveCrossover) {
  RngStream a(3, 0, StreamPurpose::Noise);
  RngStream b(3, 1, StreamPurpose::Noise);
  const std::size_t len = 1'000'000;
  const double p = 0.05;
  const BitVec z = sample_noise(BscChannel(p), len, a) ^ sample_noise(BscChannel(p), len, b);
  const double expected = effective_p(p, 2);
  EXPECT_NEAR(static_cast<double>(z.weight()) / len, expected, 3.0 * std::sqrt(expected * (1 - expected) / len));
}

TEST(Noise, RejectsInvalidProbability) {
  EXPECT_THROW(BscChannel(-0.1), Error);
  EXPECT_THROW(BscChannel(1.5), Error);
  EXPECT_THROW(ServerFailureModel(2.0, 3), Error);
}

TEST(EffectiveP, PairOfFramesGivesTwoPOneMinusP) {
  EXPECT_EQ(effective_p(0.05, 2), 2 * 0.05 * 0.95);
  EXPECT_NEAR(effective_p(0.05, 2), 0.095, 1e-15);
}

TEST(EffectiveP, SingleFrameIsIdentity) {
  for (double p : {0.0, 0.01, 0.1, 0.3, 0.5, 0.77, 1.0}) EXPECT_EQ(effective_p(p, 1), p);
}

TEST(EffectiveP, MatchesBruteForceParityAndClosedForm) {
  EXPECT_NEAR(effective_p(0.05, 3), parity_probability_brute_force(0.05, 3), 1e-15);
  for (double p : {0.01, 0.05, 0.2, 0.45}) {
    for (std::size_t d = 1; d <= 8; ++d) {
      EXPECT_NEAR(effective_p(p, d), parity_probability_brute_force(p, d), 1e-14);
      EXPECT_NEAR(effective_p(p, d), (1.0 - std::pow(1.0 - 2.0 * p, static_cast<double>(d))) / 2.0, 1e-14);
    }
  }
}

TEST(EffectiveP, MonotoneAndBelowOneHalf) {
  for (double p = 0.0; p < 0.5; p += 0.01) {
    double prev = 0.0;
    for (std::size_t d = 1; d <= 12; ++d) {
      const double e = effective_p(p, d);
      EXPECT_GE(e, prev - 1e-15);
      EXPECT_LE(e, 0.5 + 1e-15);
      prev = e;
    }
  }
}

TEST(EffectiveP, RejectsZeroFrames) {
  try {
    (void)effective_p(0.1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArg);
  }
}

TEST(Availability, DegenerateFailureProbabilities) {
  RngStream rng(4, 0, StreamPurpose::Availability);
  EXPECT_EQ(sample_availability(ServerFailureModel(0.0, 3), rng), ServerMask{0b111});
  EXPECT_EQ(sample_availability(ServerFailureModel(1.0, 3), rng), ServerMask{0});
}

TEST(Availability, PerServerRateConcentrates) {
  const ServerFailureModel model(0.1, 3);
  RngStream rng(5, 0, StreamPurpose::Availability);
  const int samples = 1'000'000;
  int up[3] = {0, 0, 0};
  for (int i = 0; i < samples; ++i) {
    const ServerMask m = sample_availability(model, rng);
    for (int j = 0; j < 3; ++j) up[j] += (m >> j) & 1U;
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(static_cast<double>(up[j]) / samples, 0.9, 3.0 * std::sqrt(0.9 * 0.1 / samples));
  }
}

TEST(RngStream, SameKeyReproducesAndDistinctKeysDiffer) {
  RngStream a(42, 7, StreamPurpose::Noise);
  RngStream b(42, 7, StreamPurpose::Noise);
  RngStream c(42, 8, StreamPurpose::Noise);
  RngStream d(42, 7, StreamPurpose::Message);
  RngStream e(43, 7, StreamPurpose::Noise);
  bool differs_c = false, differs_d = false, differs_e = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs_c |= x != c();
    differs_d |= x != d();
    differs_e |= x != e();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
  EXPECT_TRUE(differs_e);
}

TEST(RngStream, UniformStaysInUnitInterval) {
  RngStream rng(1, 1, StreamPurpose::Search);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / 100000));
}

}  // namespace
}  // namespace codednfv
