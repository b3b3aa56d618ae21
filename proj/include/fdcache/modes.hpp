#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdcache/popularity.hpp"

namespace fdcache {

/// Probabilities that an arbitrary user operates in each mode, averaged over
/// the N users (user k caches content k).
struct ModeProbabilities {
  double p_sr = 0.0;
  double p_sr_hdtx = 0.0;
  double p_fdtr = 0.0;
  double p_bfd = 0.0;
  double p_tnfd = 0.0;
  double p_hdrx = 0.0;
  double p_hdtx = 0.0;
  double p_ho = 0.0;
  double p_tx = 0.0;
  std::size_t n_users = 0;
};

/// PMF of the number of concurrently transmitting users, Binomial(N, p_tx).
struct TransmitterCountPmf {
  std::size_t n_users = 0;
  std::vector<double> pmf;

  double operator[](std::size_t k) const { return pmf[k]; }
};

namespace detail {

inline void check_user_count(const PopularityProfile& profile, std::size_t n_users) {
  if (n_users == 0) throw std::invalid_argument("n_users must be >= 1");
  if (n_users > profile.library_size())
    throw std::invalid_argument("n_users (" + std::to_string(n_users) +
                                ") exceeds library size (" +
                                std::to_string(profile.library_size()) + ")");
}

// (1 - rho)^(N-1): probability that none of the other N-1 users requests a
// given content.
inline double nobody_else_requests(double rho, std::size_t n_users) {
  if (n_users == 1) return 1.0;
  if (rho >= 1.0) return 0.0;
  return std::exp(static_cast<double>(n_users - 1) * std::log1p(-rho));
}

}  // namespace detail

inline ModeProbabilities compute_mode_probabilities(const PopularityProfile& profile,
                                                    std::size_t n_users) {
  detail::check_user_count(profile, n_users);
  const double p_hit = hitting_probability(profile, n_users);

  CompensatedSum sr, sr_hdtx, fdtr, bfd, tnfd, hdrx, hdtx, ho, tx;
  for (std::size_t k = 1; k <= n_users; ++k) {
    const double rho = profile.rho(k);
    const double idle = detail::nobody_else_requests(rho, n_users);
    const double demanded = 1.0 - idle;
    const double other_hit = p_hit - rho;
    const double miss = 1.0 - p_hit;

    sr.add(rho * idle);
    sr_hdtx.add(rho * demanded);
    fdtr.add(other_hit * demanded);
    bfd.add(other_hit * rho);
    tnfd.add(other_hit * (1.0 - rho - idle));
    hdrx.add(other_hit * idle);
    hdtx.add(miss * demanded);
    ho.add(miss * idle);
    tx.add(demanded);
  }

  const double inv_n = 1.0 / static_cast<double>(n_users);
  ModeProbabilities out;
  out.n_users = n_users;
  out.p_sr = sr.value() * inv_n;
  out.p_sr_hdtx = sr_hdtx.value() * inv_n;
  out.p_fdtr = fdtr.value() * inv_n;
  out.p_bfd = bfd.value() * inv_n;
  out.p_tnfd = tnfd.value() * inv_n;
  out.p_hdrx = hdrx.value() * inv_n;
  out.p_hdtx = hdtx.value() * inv_n;
  out.p_ho = ho.value() * inv_n;
  out.p_tx = tx.value() * inv_n;
  return out;
}

/// Probability that an arbitrary user is transmitting (SR-HDTX, HDTX or FDTR).
inline double transmit_probability(const PopularityProfile& profile, std::size_t n_users) {
  detail::check_user_count(profile, n_users);
  CompensatedSum tx;
  for (std::size_t k = 1; k <= n_users; ++k)
    tx.add(1.0 - detail::nobody_else_requests(profile.rho(k), n_users));
  return tx.value() / static_cast<double>(n_users);
}

/// Binomial(N, p_tx) mass function, evaluated in log space.
inline TransmitterCountPmf transmitter_count_pmf(double p_tx, std::size_t n_users) {
  if (!(p_tx >= 0.0 && p_tx <= 1.0))
    throw std::invalid_argument("transmitter_count_pmf: p_tx must lie in [0, 1]");

  TransmitterCountPmf out;
  out.n_users = n_users;
  out.pmf.assign(n_users + 1, 0.0);
  if (p_tx == 0.0) {
    out.pmf.front() = 1.0;
    return out;
  }
  if (p_tx == 1.0) {
    out.pmf.back() = 1.0;
    return out;
  }

  const double n = static_cast<double>(n_users);
  const double log_p = std::log(p_tx);
  const double log_q = std::log1p(-p_tx);
  const double log_n_fact = std::lgamma(n + 1.0);
  for (std::size_t k = 0; k <= n_users; ++k) {
    const double kk = static_cast<double>(k);
    const double log_choose = log_n_fact - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    out.pmf[k] = std::exp(log_choose + kk * log_p + (n - kk) * log_q);
  }
  return out;
}

}  // namespace fdcache
