#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fdcache/analytic.hpp"
#include "fdcache/geometry.hpp"
#include "fdcache/modes.hpp"
#include "fdcache/parallel.hpp"
#include "fdcache/popularity.hpp"

namespace fdcache {

enum class Mode : std::uint8_t { sr, sr_hdtx, bfd, tnfd, hdrx, hdtx, ho };

inline constexpr std::size_t kModeCount = 7;
inline constexpr std::array<Mode, kModeCount> kAllModes = {
    Mode::sr, Mode::sr_hdtx, Mode::bfd, Mode::tnfd, Mode::hdrx, Mode::hdtx, Mode::ho};

inline constexpr std::string_view mode_name(Mode m) {
  constexpr std::array<std::string_view, kModeCount> names = {"SR",   "SR-HDTX", "BFD", "TNFD",
                                                              "HDRX", "HDTX",    "HO"};
  return names[static_cast<std::size_t>(m)];
}

inline constexpr bool is_transmitting(Mode m) {
  return m == Mode::sr_hdtx || m == Mode::bfd || m == Mode::tnfd || m == Mode::hdtx;
}

inline constexpr bool is_d2d_receiver(Mode m) {
  return m == Mode::hdrx || m == Mode::bfd || m == Mode::tnfd;
}

inline constexpr bool is_self_served(Mode m) { return m == Mode::sr || m == Mode::sr_hdtx; }

/// Operating modes of every user for one request vector. User indices are
/// 0-based here; user u caches content u + 1.
struct ModeClassification {
  std::vector<Mode> modes;
  std::vector<std::size_t> transmitters;               // ascending
  std::vector<std::vector<std::size_t>> requesters;    // users asking for u's content
  std::vector<std::optional<std::size_t>> server_of;   // user caching u's request
};

inline ModeClassification classify_modes(std::span<const std::size_t> requests,
                                         std::size_t n_users) {
  if (requests.size() != n_users)
    throw std::invalid_argument("classify_modes: need one request per user");

  ModeClassification out;
  out.modes.resize(n_users);
  out.requesters.assign(n_users, {});
  out.server_of.assign(n_users, std::nullopt);

  for (std::size_t u = 0; u < n_users; ++u) {
    const std::size_t r = requests[u];
    if (r == 0) throw std::invalid_argument("classify_modes: content indices are 1-based");
    if (r <= n_users && r - 1 != u) {
      out.requesters[r - 1].push_back(u);
      out.server_of[u] = r - 1;
    }
  }

  for (std::size_t u = 0; u < n_users; ++u) {
    const bool self = requests[u] == u + 1;
    const bool hit = out.server_of[u].has_value();
    const bool demanded = !out.requesters[u].empty();
    Mode m;
    if (self)
      m = demanded ? Mode::sr_hdtx : Mode::sr;
    else if (hit && demanded)
      m = requests[*out.server_of[u]] == u + 1 ? Mode::bfd : Mode::tnfd;
    else if (hit)
      m = Mode::hdrx;
    else
      m = demanded ? Mode::hdtx : Mode::ho;
    out.modes[u] = m;
    if (demanded) out.transmitters.push_back(u);
  }
  return out;
}

enum class EvaluationScope { all_users, one_random_user };

struct SimConfig {
  std::size_t trials = 10000;
  std::uint64_t master_seed = 1;
  EvaluationScope evaluate = EvaluationScope::all_users;
  std::size_t workers = 0;  // 0 = hardware concurrency (capped by FD_D2D_THREADS)
};

/// One sampled network.
struct NetworkRealization {
  std::vector<Point2D> positions;
  std::vector<std::size_t> requests;  // content indices, 1..m
  ModeClassification classification;
  std::vector<std::optional<std::size_t>> serve_target;  // receiver each transmitter power-controls toward
};

struct TrialOutcome {
  NetworkRealization network;
  /// SIR of every D2D receiver (+inf without interference); NaN otherwise.
  std::vector<double> sir;
  /// User picked for EvaluationScope::one_random_user.
  std::size_t sampled_user = 0;

  bool succeeds(std::size_t user, double theta) const {
    const Mode m = network.classification.modes[user];
    if (is_self_served(m)) return true;
    if (!is_d2d_receiver(m)) return false;
    return sir[user] >= theta;
  }

  std::vector<bool> success_indicators(double theta) const {
    std::vector<bool> out(sir.size());
    for (std::size_t u = 0; u < sir.size(); ++u) out[u] = succeeds(u, theta);
    return out;
  }
};

/// Per-trial seed, a function of (master_seed, trial_index) only.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master_seed) ^ trial_index);
}

using TrialRng = std::mt19937_64;

/// SIR of receiver `u` in a realization. `h0` is the serving-link fading and
/// `fading[k]` the fading from transmitters[k] to `u` (entries for u and its
/// server are ignored). With `full_duplex` the residual self-interference
/// beta*Z0^alpha is added per the channel's si_model.
inline double receiver_sir(const NetworkRealization& net, const ModelConfig& cfg, std::size_t u,
                           bool full_duplex, double h0, std::span<const double> fading) {
  const auto& cls = net.classification;
  const double alpha = cfg.channel.alpha;
  const std::size_t server = cls.server_of.at(u).value();
  double interference = 0.0;
  std::size_t interferers = 0;
  for (std::size_t k = 0; k < cls.transmitters.size(); ++k) {
    const std::size_t nu = cls.transmitters[k];
    if (nu == server || nu == u) continue;
    const double gain =
        std::pow(distance(net.positions[nu], net.positions[*net.serve_target[nu]]), alpha);
    interference += fading[k] * gain * std::pow(distance(net.positions[nu], net.positions[u]), -alpha);
    ++interferers;
  }
  if (full_duplex) {
    const double si =
        cfg.channel.beta * std::pow(distance(net.positions[server], net.positions[u]), alpha);
    interference += cfg.channel.si_model == SelfInterferenceModel::per_interferer
                        ? static_cast<double>(interferers) * si
                        : si;
  }
  return interference > 0.0 ? h0 / interference : std::numeric_limits<double>::infinity();
}

/// Samples one network (positions, requests, modes, power-control targets,
/// fading) and the SIR of every D2D receiver.
template <class Rng>
TrialOutcome run_trial(const ModelConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.n_users;

  TrialOutcome out;
  auto& net = out.network;
  net.positions.resize(n);
  for (auto& p : net.positions) p = sample_uniform_disk(cfg.disk, rng);
  net.requests.resize(n);
  for (auto& r : net.requests) r = sample_request(cfg.profile, rng);
  net.classification = classify_modes(net.requests, n);
  const auto& cls = net.classification;

  net.serve_target.assign(n, std::nullopt);
  for (std::size_t mu : cls.transmitters) {
    const auto& reqs = cls.requesters[mu];
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, reqs.size() - 1)(rng);
    net.serve_target[mu] = reqs[pick];
  }

  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> fading(cls.transmitters.size());
  out.sir.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t u = 0; u < n; ++u) {
    const Mode m = cls.modes[u];
    if (!is_d2d_receiver(m)) continue;
    const double h0 = exp1(rng);
    for (auto& h : fading) h = exp1(rng);
    out.sir[u] = receiver_sir(net, cfg, u, m != Mode::hdrx, h0, fading);
  }
  out.sampled_user = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  return out;
}

/// Aggregated counts from a batch of trials. All counters are integers, so
/// merging is exact and independent of worker scheduling.
struct SimulationTally {
  std::uint64_t trials = 0;
  std::uint64_t samples = 0;                        // evaluated users
  std::vector<std::uint64_t> successes;             // per threshold
  std::array<std::uint64_t, kModeCount> mode_counts{};
  std::vector<std::uint64_t> transmitter_hist;      // |transmitters| per trial, 0..N

  void merge(const SimulationTally& o) {
    trials += o.trials;
    samples += o.samples;
    for (std::size_t i = 0; i < successes.size(); ++i) successes[i] += o.successes[i];
    for (std::size_t i = 0; i < kModeCount; ++i) mode_counts[i] += o.mode_counts[i];
    for (std::size_t i = 0; i < transmitter_hist.size(); ++i)
      transmitter_hist[i] += o.transmitter_hist[i];
  }

  double mode_frequency(Mode m) const {
    return samples == 0 ? 0.0
                        : static_cast<double>(mode_counts[static_cast<std::size_t>(m)]) /
                              static_cast<double>(samples);
  }

  /// Empirical counterpart of ModeProbabilities (p_tx from mean |transmitters| / N).
  ModeProbabilities empirical_modes(std::size_t n_users) const {
    ModeProbabilities p;
    p.n_users = n_users;
    p.p_sr = mode_frequency(Mode::sr);
    p.p_sr_hdtx = mode_frequency(Mode::sr_hdtx);
    p.p_bfd = mode_frequency(Mode::bfd);
    p.p_tnfd = mode_frequency(Mode::tnfd);
    p.p_fdtr = p.p_bfd + p.p_tnfd;
    p.p_hdrx = mode_frequency(Mode::hdrx);
    p.p_hdtx = mode_frequency(Mode::hdtx);
    p.p_ho = mode_frequency(Mode::ho);
    double tx = 0.0;
    for (std::size_t k = 0; k < transmitter_hist.size(); ++k)
      tx += static_cast<double>(k) * static_cast<double>(transmitter_hist[k]);
    p.p_tx = trials == 0 ? 0.0 : tx / static_cast<double>(trials) / static_cast<double>(n_users);
    return p;
  }
};

struct SimulationReport {
  SuccessCurve curve;  // source = simulated
  SimulationTally tally;
};

inline constexpr std::size_t kTrialsPerChunk = 1024;

inline SimulationReport run_experiment(const ModelConfig& cfg, const SimConfig& sim,
                                       const std::vector<double>& thetas) {
  cfg.validate();
  if (sim.trials == 0) throw std::invalid_argument("SimConfig: trials must be >= 1");
  const std::size_t n = cfg.n_users;

  auto empty_tally = [&] {
    SimulationTally t;
    t.successes.assign(thetas.size(), 0);
    t.transmitter_hist.assign(n + 1, 0);
    return t;
  };

  const std::size_t chunks = (sim.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  std::vector<SimulationTally> partial(chunks, empty_tally());
  parallel_for(chunks, worker_count(sim.workers), [&](std::size_t c) {
    SimulationTally& tally = partial[c];
    const std::size_t begin = c * kTrialsPerChunk;
    const std::size_t end = std::min(sim.trials, begin + kTrialsPerChunk);
    for (std::size_t trial = begin; trial < end; ++trial) {
      TrialRng rng(trial_seed(sim.master_seed, trial));
      const TrialOutcome outcome = run_trial(cfg, rng);
      const auto& cls = outcome.network.classification;
      ++tally.trials;
      ++tally.transmitter_hist[cls.transmitters.size()];

      auto evaluate = [&](std::size_t u) {
        ++tally.samples;
        ++tally.mode_counts[static_cast<std::size_t>(cls.modes[u])];
        for (std::size_t i = 0; i < thetas.size(); ++i)
          if (outcome.succeeds(u, thetas[i])) ++tally.successes[i];
      };
      if (sim.evaluate == EvaluationScope::all_users)
        for (std::size_t u = 0; u < n; ++u) evaluate(u);
      else
        evaluate(outcome.sampled_user);
    }
  });

  SimulationReport report;
  report.tally = empty_tally();
  for (const auto& p : partial) report.tally.merge(p);

  auto& curve = report.curve;
  const auto& tally = report.tally;
  const double samples = static_cast<double>(tally.samples);
  curve.source = CurveSource::simulated;
  curve.thetas = thetas;
  curve.p_cache = tally.mode_frequency(Mode::sr) + tally.mode_frequency(Mode::sr_hdtx);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double p = static_cast<double>(tally.successes[i]) / samples;
    curve.p_total.push_back(p);
    curve.p_sir.push_back(p - curve.p_cache);
    curve.ci_halfwidth.push_back(1.96 * std::sqrt(p * (1.0 - p) / samples));
  }
  return report;
}

/// Mode frequencies from request vectors alone (no geometry), one uniformly
/// chosen user per draw.
inline SimulationTally tally_request_modes(const PopularityProfile& profile, std::size_t n_users,
                                           std::size_t draws, std::uint64_t seed) {
  if (n_users == 0 || n_users > profile.library_size())
    throw std::invalid_argument("tally_request_modes: need 1 <= n_users <= library size");
  SimulationTally tally;
  tally.transmitter_hist.assign(n_users + 1, 0);
  TrialRng rng(trial_seed(seed, 0));
  std::vector<std::size_t> requests(n_users);
  std::uniform_int_distribution<std::size_t> pick(0, n_users - 1);
  for (std::size_t d = 0; d < draws; ++d) {
    for (auto& r : requests) r = sample_request(profile, rng);
    const auto cls = classify_modes(requests, n_users);
    ++tally.trials;
    ++tally.samples;
    ++tally.transmitter_hist[cls.transmitters.size()];
    ++tally.mode_counts[static_cast<std::size_t>(cls.modes[pick(rng)])];
  }
  return tally;
}

}  // namespace fdcache
