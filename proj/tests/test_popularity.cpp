#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "fdcache/popularity.hpp"
#include "oracles.hpp"

using namespace fdcache;

TEST(BuildZipf, UniformCase) {
  const auto p = build_zipf(2, 0.0);
  EXPECT_EQ(p.rho(1), 0.5);
  EXPECT_EQ(p.rho(2), 0.5);
}

TEST(BuildZipf, HandSumForThreeContents) {
  const auto p = build_zipf(3, 1.0);
  EXPECT_NEAR(p.rho(1), 6.0 / 11.0, 1e-15);
  EXPECT_NEAR(p.rho(2), 3.0 / 11.0, 1e-15);
  EXPECT_NEAR(p.rho(3), 2.0 / 11.0, 1e-15);
}

TEST(BuildZipf, LargeLibraryIsNormalizedAndNonIncreasing) {
  const auto p = build_zipf(1000, 1.2);
  const auto rho = p.rho();
  for (std::size_t k = 1; k < rho.size(); ++k) EXPECT_LE(rho[k], rho[k - 1]);
  long double total = 0.0L;
  for (double r : rho) total += r;
  EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12);
  EXPECT_NEAR(p.prefix().back(), 1.0, 1e-12);
}

TEST(BuildZipf, MatchesNaiveLongDoubleSummation) {
  const auto p = build_zipf(5000, 0.8);
  const auto ref = oracle::zipf_naive(5000, 0.8);
  for (std::size_t k = 0; k < ref.size(); k += 97)
    EXPECT_NEAR(p.rho()[k], static_cast<double>(ref[k]), 1e-15);
}

TEST(BuildZipf, RejectsInvalidArguments) {
  EXPECT_THROW(build_zipf(0, 1.0), std::invalid_argument);
  EXPECT_THROW(build_zipf(10, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(build_zipf(10, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(build_zipf(10, -0.5), std::invalid_argument);
}

TEST(BuildZipf, RandomProfilesSatisfyInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> m_dist(1, 20000);
  std::uniform_real_distribution<double> g_dist(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = m_dist(rng);
    const double g = trial % 10 == 0 ? 0.0 : g_dist(rng);
    const auto p = build_zipf(m, g);
    const auto rho = p.rho();
    long double total = 0.0L;
    for (double r : rho) total += r;
    ASSERT_NEAR(static_cast<double>(total), 1.0, 1e-12) << "m=" << m << " g=" << g;
    for (std::size_t k = 1; k < m; ++k) {
      ASSERT_LE(rho[k], rho[k - 1]);
      ASSERT_LE(p.prefix()[k - 1], p.prefix()[k]);
    }
    if (g == 0.0) {
      for (double r : rho) ASSERT_NEAR(r, 1.0 / static_cast<double>(m), 1e-15);
    }
  }
}

TEST(HittingProbability, HandSum) {
  EXPECT_NEAR(hitting_probability(build_zipf(3, 1.0), 2), 9.0 / 11.0, 1e-15);
}

TEST(HittingProbability, FullLibraryCached) {
  for (double g : {0.0, 0.7, 2.5}) EXPECT_NEAR(hitting_probability(build_zipf(40, g), 40), 1.0, 1e-12);
}

TEST(HittingProbability, IndependentSummationOracle) {
  const auto p = build_zipf(1000, 1.2);
  long double num = 0.0L, den = 0.0L;
  for (int k = 1; k <= 1000; ++k) {
    const long double w = std::pow(static_cast<long double>(k), -1.2L);
    den += w;
    if (k <= 20) num += w;
  }
  EXPECT_NEAR(hitting_probability(p, 20), static_cast<double>(num / den), 1e-14);
}

TEST(HittingProbability, MonotoneInUsers) {
  const auto p = build_zipf(300, 0.9);
  double prev = 0.0;
  for (std::size_t n = 1; n <= 300; ++n) {
    const double h = hitting_probability(p, n);
    ASSERT_GE(h, prev);
    ASSERT_LE(h, 1.0);
    prev = h;
  }
}

TEST(HittingProbability, RejectsMoreUsersThanContents) {
  EXPECT_THROW(hitting_probability(build_zipf(5, 1.0), 6), std::invalid_argument);
  EXPECT_THROW(hitting_probability(build_zipf(5, 1.0), 0), std::invalid_argument);
}

TEST(SampleRequest, SingleContent) {
  const auto p = build_zipf(1, 3.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_request(p, rng), 1u);
}

TEST(SampleRequest, UniformPairWithinThreeSigmaBand) {
  const auto p = build_zipf(2, 0.0);
  std::mt19937_64 rng(2);
  const int draws = 1'000'000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += sample_request(p, rng) == 1;
  const double freq = static_cast<double>(ones) / draws;
  EXPECT_GE(freq, 0.4985);
  EXPECT_LE(freq, 0.5015);
}

TEST(SampleRequest, MostPopularOfThreeWithinThreeSigma) {
  const auto p = build_zipf(3, 1.0);
  std::mt19937_64 rng(3);
  const int draws = 1'000'000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += sample_request(p, rng) == 1;
  const double expected = 6.0 / 11.0;
  const double sigma = std::sqrt(expected * (1 - expected) / draws);
  EXPECT_NEAR(static_cast<double>(ones) / draws, expected, 3 * sigma);
}

TEST(SampleRequest, HistogramConvergesInL1) {
  for (auto [m, g] : {std::pair{50ul, 1.2}, std::pair{200ul, 0.6}}) {
    const auto p = build_zipf(m, g);
    std::mt19937_64 rng(4);
    const std::size_t draws = 200'000;
    std::vector<std::size_t> hist(m, 0);
    for (std::size_t i = 0; i < draws; ++i) {
      const auto k = sample_request(p, rng);
      ASSERT_GE(k, 1u);
      ASSERT_LE(k, m);
      ++hist[k - 1];
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      l1 += std::abs(static_cast<double>(hist[k]) / draws - p.rho()[k]);
    EXPECT_LT(l1, 5.0 * std::sqrt(static_cast<double>(m) / draws)) << "m=" << m;
  }
}

TEST(SampleRequest, DeterministicGivenState) {
  const auto p = build_zipf(1000, 1.2);
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_request(p, a), sample_request(p, b));
}
