#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fdcache/simulator.hpp"

using namespace fdcache;

namespace {

std::vector<double> db_grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double d = lo; d <= hi + 1e-9; d += step) out.push_back(std::pow(10.0, d / 10.0));
  return out;
}

}  // namespace

TEST(ClassifyModes, MutualExchangeIsBidirectional) {
  const std::vector<std::size_t> req = {2, 1};
  const auto c = classify_modes(req, 2);
  EXPECT_EQ(c.modes[0], Mode::bfd);
  EXPECT_EQ(c.modes[1], Mode::bfd);
  EXPECT_EQ(c.transmitters, (std::vector<std::size_t>{0, 1}));
}

TEST(ClassifyModes, ThreeUserExample) {
  // user 0 asks user 1's content, user 1 asks user 2's, user 2 has its own.
  const std::vector<std::size_t> req = {2, 3, 3};
  const auto c = classify_modes(req, 3);
  EXPECT_EQ(c.modes[0], Mode::hdrx);
  EXPECT_EQ(c.modes[1], Mode::tnfd);
  EXPECT_EQ(c.modes[2], Mode::sr_hdtx);
  EXPECT_EQ(c.transmitters, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(c.server_of[0], 1u);
  EXPECT_EQ(c.server_of[1], 2u);
  EXPECT_FALSE(c.server_of[2].has_value());
}

TEST(ClassifyModes, OutsideContentAndIdleUsers) {
  const std::vector<std::size_t> req = {1, 50, 1};
  const auto c = classify_modes(req, 3);
  EXPECT_EQ(c.modes[0], Mode::sr_hdtx);
  EXPECT_EQ(c.modes[1], Mode::ho);
  EXPECT_EQ(c.modes[2], Mode::hdrx);
  const std::vector<std::size_t> hd = {9, 1};
  EXPECT_EQ(classify_modes(hd, 2).modes[0], Mode::hdtx);
}

TEST(ClassifyModes, RejectsMalformedInput) {
  const std::vector<std::size_t> a = {1, 2};
  EXPECT_THROW(classify_modes(a, 3), std::invalid_argument);
  const std::vector<std::size_t> b = {0, 2};
  EXPECT_THROW(classify_modes(b, 2), std::invalid_argument);
}

TEST(ClassifyModes, InvariantsOnRandomRequests) {
  const auto prof = build_zipf(60, 0.8);
  std::mt19937_64 rng(12);
  for (int d = 0; d < 20000; ++d) {
    const std::size_t n = 1 + d % 30;
    std::vector<std::size_t> req(n);
    for (auto& r : req) r = sample_request(prof, rng);
    const auto c = classify_modes(req, n);
    std::set<std::size_t> tx(c.transmitters.begin(), c.transmitters.end());
    for (std::size_t u = 0; u < n; ++u) {
      ASSERT_EQ(tx.count(u) == 1, is_transmitting(c.modes[u]));
      ASSERT_EQ(c.server_of[u].has_value(), is_d2d_receiver(c.modes[u]));
      if (c.server_of[u]) {
        ASSERT_TRUE(tx.count(*c.server_of[u]));
      }
      if (c.modes[u] == Mode::bfd) {
        ASSERT_EQ(req[*c.server_of[u]], u + 1);
      }
    }
  }
}

TEST(RunTrial, VanishingThresholdServesEveryReceiver) {
  const auto cfg = make_model(10, 30.0, 100, 1.2);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 2000; ++k) {
    const auto out = run_trial(cfg, rng);
    for (std::size_t u = 0; u < 10; ++u) {
      const Mode m = out.network.classification.modes[u];
      const bool expected = is_self_served(m) || is_d2d_receiver(m);
      ASSERT_EQ(out.succeeds(u, 1e-300), expected);
      if (is_d2d_receiver(m)) ASSERT_GT(out.sir[u], 0.0);
      else ASSERT_TRUE(std::isnan(out.sir[u]));
    }
  }
}

TEST(RunTrial, LoneLinkHasNoInterference) {
  // Two contents cached by two users: any D2D receiver is served by the only
  // other user, so with per-interferer self-interference there is nothing else.
  const auto cfg = make_model(2, 30.0, 2, 0.0);
  std::size_t receivers = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    TrialRng rng(seed);
    const auto out = run_trial(cfg, rng);
    for (std::size_t u = 0; u < 2; ++u)
      if (is_d2d_receiver(out.network.classification.modes[u])) {
        ++receivers;
        ASSERT_TRUE(std::isinf(out.sir[u]));
        ASSERT_TRUE(out.succeeds(u, 1e12));
      }
  }
  EXPECT_GT(receivers, 0u);
}

TEST(RunExperiment, SingleTrialSingleUser) {
  const auto cfg = make_model(1, 30.0, 10, 1.0);
  SimConfig sim;
  sim.trials = 1;
  const auto rep = run_experiment(cfg, sim, {1.0});
  EXPECT_EQ(rep.tally.trials, 1u);
  EXPECT_EQ(rep.tally.samples, 1u);
  EXPECT_TRUE(rep.curve.p_total[0] == 0.0 || rep.curve.p_total[0] == 1.0);
  SimConfig none;
  none.trials = 0;
  EXPECT_THROW(run_experiment(cfg, none, {1.0}), std::invalid_argument);
}

TEST(RunExperiment, IndependentOfWorkerCount) {
  const auto cfg = make_model(10, 30.0, 1000, 1.2);
  const auto thetas = db_grid(-10, 30, 5);
  SimConfig a;
  a.trials = 5000;
  a.master_seed = 42;
  a.workers = 1;
  SimConfig b = a;
  b.workers = 4;
  const auto ra = run_experiment(cfg, a, thetas);
  const auto rb = run_experiment(cfg, b, thetas);
  EXPECT_EQ(ra.tally.successes, rb.tally.successes);
  EXPECT_EQ(ra.tally.mode_counts, rb.tally.mode_counts);
  EXPECT_EQ(ra.curve.p_total, rb.curve.p_total);
  SimConfig c = a;
  c.master_seed = 43;
  EXPECT_NE(run_experiment(cfg, c, thetas).tally.successes, ra.tally.successes);
}

TEST(RunExperiment, ModeFrequenciesMatchClosedForms) {
  const auto cfg = make_model(20, 30.0, 1000, 1.2);
  SimConfig sim;
  sim.trials = 200'000;
  sim.evaluate = EvaluationScope::one_random_user;
  sim.master_seed = 9;
  const auto rep = run_experiment(cfg, sim, {1.0});
  const auto p = compute_mode_probabilities(cfg.profile, 20);
  const std::array<double, kModeCount> expected = {p.p_sr,   p.p_sr_hdtx, p.p_bfd, p.p_tnfd,
                                                   p.p_hdrx, p.p_hdtx,    p.p_ho};
  const double n = static_cast<double>(rep.tally.samples);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < kModeCount; ++i) {
    const double f = rep.tally.mode_frequency(kAllModes[i]);
    EXPECT_NEAR(f, expected[i], 3 * std::sqrt(expected[i] * (1 - expected[i]) / n) + 1e-12)
        << mode_name(kAllModes[i]);
    if (expected[i] > 0) chi2 += n * (f - expected[i]) * (f - expected[i]) / expected[i];
  }
  EXPECT_LT(chi2, 16.812);  // 6 degrees of freedom, 1%
}

TEST(RunExperiment, MeanTransmitterCount) {
  const std::size_t n = 20;
  const auto prof = build_zipf(1000, 1.2);
  const auto tally = tally_request_modes(prof, n, 200'000, 5);
  const double ptx = transmit_probability(prof, n);
  double mean = 0.0, sq = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double c = static_cast<double>(tally.transmitter_hist[k]);
    mean += k * c;
    sq += static_cast<double>(k * k) * c;
  }
  const double draws = static_cast<double>(tally.trials);
  mean /= draws;
  const double var = sq / draws - mean * mean;
  EXPECT_NEAR(mean, n * ptx, 3 * std::sqrt(var / draws));
  EXPECT_NEAR(tally.empirical_modes(n).p_tx, ptx, 3 * std::sqrt(var / draws) / n);
  // Transmit events are dependent, so the count is not exactly Binomial.
  const auto pmf = transmitter_count_pmf(ptx, n);
  double tv = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    tv += std::abs(static_cast<double>(tally.transmitter_hist[k]) / draws - pmf[k]);
  RecordProperty("binomial_total_variation", std::to_string(0.5 * tv));
}

TEST(RunExperiment, CurveIsMonotoneInThreshold) {
  const auto cfg = make_model(10, 30.0, 1000, 1.2);
  SimConfig sim;
  sim.trials = 3000;
  const auto rep = run_experiment(cfg, sim, db_grid(-20, 40, 2));
  for (std::size_t i = 1; i < rep.curve.p_total.size(); ++i)
    EXPECT_LE(rep.curve.p_total[i], rep.curve.p_total[i - 1]);
  for (std::size_t i = 0; i < rep.curve.p_total.size(); ++i) {
    EXPECT_GE(rep.curve.p_total[i], rep.curve.p_cache);
    EXPECT_GE(rep.curve.ci_halfwidth[i], 0.0);
  }
}

TEST(ReceiverSir, FullDuplexWithoutSelfInterferenceMatchesHalfDuplex) {
  const auto cfg = make_model(12, 30.0, 50, 0.8, 4.0, 0.0);
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> fade(1.0);
  std::size_t checked = 0;
  for (int k = 0; k < 500; ++k) {
    const auto out = run_trial(cfg, rng);
    std::vector<double> f(out.network.classification.transmitters.size());
    for (auto& h : f) h = fade(rng);
    for (std::size_t u = 0; u < 12; ++u) {
      if (!is_d2d_receiver(out.network.classification.modes[u])) continue;
      ASSERT_EQ(receiver_sir(out.network, cfg, u, true, 0.7, f),
                receiver_sir(out.network, cfg, u, false, 0.7, f));
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(ReceiverSir, SelfInterferenceLowersSir) {
  const auto cfg = make_model(12, 30.0, 50, 0.8, 4.0, 1e-2);
  std::mt19937_64 rng(18);
  for (int k = 0; k < 300; ++k) {
    const auto out = run_trial(cfg, rng);
    std::vector<double> f(out.network.classification.transmitters.size(), 1.0);
    for (std::size_t u = 0; u < 12; ++u) {
      if (!is_d2d_receiver(out.network.classification.modes[u])) continue;
      ASSERT_LE(receiver_sir(out.network, cfg, u, true, 1.0, f),
                receiver_sir(out.network, cfg, u, false, 1.0, f));
    }
  }
}

// Channel inversion makes the interference term scale-free; without
// self-interference R only changes the random stream.
TEST(RunExperiment, DiskRadiusDoesNotMatter) {
  const auto thetas = db_grid(-10, 20, 10);
  SimConfig sim;
  sim.trials = 20000;
  const auto small = run_experiment(make_model(10, 30.0, 1000, 1.2, 4.0, 0.0), sim, thetas);
  sim.master_seed = 2;
  const auto large = run_experiment(make_model(10, 300.0, 1000, 1.2, 4.0, 0.0), sim, thetas);
  for (std::size_t i = 0; i < thetas.size(); ++i)
    EXPECT_NEAR(small.curve.p_total[i], large.curve.p_total[i],
                small.curve.ci_halfwidth[i] + large.curve.ci_halfwidth[i]);
}

TEST(TrialSeed, DistinctAcrossIndicesAndSeeds) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(trial_seed(m, i));
  EXPECT_EQ(seen.size(), 4000u);
}
