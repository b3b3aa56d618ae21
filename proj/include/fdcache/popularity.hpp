#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdcache {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Request distribution over a library of m contents. Content indices are
/// 1-based throughout the public API; user k (1-based) caches content k.
class PopularityProfile {
public:
  std::size_t library_size() const { return rho_.size(); }
  double gamma_r() const { return gamma_r_; }

  /// Request probability of content `k` (1-based).
  double rho(std::size_t k) const { return rho_.at(k - 1); }
  std::span<const double> rho() const { return rho_; }

  /// prefix()[n-1] = sum of the n most popular request probabilities.
  std::span<const double> prefix() const { return prefix_; }

  friend PopularityProfile build_zipf(std::size_t m, double gamma_r);

private:
  PopularityProfile() = default;

  double gamma_r_ = 0.0;
  std::vector<double> rho_;
  std::vector<double> prefix_;
};

/// Zipf profile rho_k = k^-gamma / sum_{j<=m} j^-gamma, normalized by direct
/// compensated summation.
inline PopularityProfile build_zipf(std::size_t m, double gamma_r) {
  if (m == 0) throw std::invalid_argument("build_zipf: library size must be >= 1");
  if (!std::isfinite(gamma_r) || gamma_r < 0.0)
    throw std::invalid_argument("build_zipf: gamma_r must be finite and >= 0, got " +
                                std::to_string(gamma_r));

  PopularityProfile p;
  p.gamma_r_ = gamma_r;
  p.rho_.resize(m);
  CompensatedSum norm;
  for (std::size_t k = 1; k <= m; ++k) {
    const double w = gamma_r == 0.0 ? 1.0 : std::pow(static_cast<double>(k), -gamma_r);
    p.rho_[k - 1] = w;
    norm.add(w);
  }
  const double total = norm.value();
  for (double& r : p.rho_) r /= total;

  p.prefix_.resize(m);
  CompensatedSum acc;
  for (std::size_t k = 0; k < m; ++k) {
    acc.add(p.rho_[k]);
    p.prefix_[k] = acc.value();
  }
  return p;
}

/// Probability that a request falls into the contents cached by the first
/// `n_users` users (one distinct content each).
inline double hitting_probability(const PopularityProfile& profile, std::size_t n_users) {
  if (n_users == 0) throw std::invalid_argument("hitting_probability: n_users must be >= 1");
  if (n_users > profile.library_size())
    throw std::invalid_argument("hitting_probability: n_users (" + std::to_string(n_users) +
                                ") exceeds library size (" +
                                std::to_string(profile.library_size()) + ")");
  return std::min(1.0, profile.prefix()[n_users - 1]);
}

/// Draws a content index in 1..m by inverse-CDF search over the prefix sums.
template <class Rng>
std::size_t sample_request(const PopularityProfile& profile, Rng& rng) {
  const auto prefix = profile.prefix();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
  const auto idx = static_cast<std::size_t>(it - prefix.begin());
  return std::min(idx, prefix.size() - 1) + 1;
}

}  // namespace fdcache
