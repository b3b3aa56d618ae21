#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdcache/geometry.hpp"
#include "fdcache/modes.hpp"
#include "fdcache/parallel.hpp"
#include "fdcache/popularity.hpp"
#include "fdcache/quadrature.hpp"

namespace fdcache {

/// Receiver type of the user of interest.
enum class ReceiverKind { hdrx, fdtr };

/// How residual self-interference enters the SIR of a full-duplex receiver.
/// per_interferer adds beta*Z0^alpha once per interfering transmitter;
/// single adds it exactly once.
enum class SelfInterferenceModel { per_interferer, single };

struct ChannelConfig {
  double alpha = 4.0;
  double beta = 1e-5;
  SelfInterferenceModel si_model = SelfInterferenceModel::per_interferer;

  void validate() const {
    if (!(std::isfinite(alpha) && alpha > 2.0))
      throw std::invalid_argument("ChannelConfig: alpha must be > 2");
    if (!(beta >= 0.0 && beta <= 1.0))
      throw std::invalid_argument("ChannelConfig: beta must lie in [0, 1]");
  }
};

struct ModelConfig {
  std::size_t n_users;
  DiskConfig disk;
  PopularityProfile profile;
  ChannelConfig channel;

  void validate() const {
    if (n_users == 0) throw std::invalid_argument("ModelConfig: n_users must be >= 1");
    if (n_users > profile.library_size())
      throw std::invalid_argument("ModelConfig: n_users (" + std::to_string(n_users) +
                                  ") exceeds library size (" +
                                  std::to_string(profile.library_size()) + ")");
    channel.validate();
  }
};

inline ModelConfig make_model(std::size_t n_users, double radius, std::size_t library_size,
                              double gamma_r, double alpha = 4.0, double beta = 1e-5,
                              SelfInterferenceModel si = SelfInterferenceModel::per_interferer) {
  ModelConfig cfg{n_users, DiskConfig(radius), build_zipf(library_size, gamma_r),
                  ChannelConfig{alpha, beta, si}};
  cfg.validate();
  return cfg;
}

/// Tabulated pieces of the interference Laplace transform at one argument s.
///
/// The per-interferer factor E[J | v, t] (the sum of the two link-distance branch
/// integrals over z_i and the interferer angle) does not depend on z0 or on
/// the transmitter count, so it is computed once on the (v, t) grid. The
/// full-duplex self-interference factor exp(-s*beta*z0^alpha) does not depend
/// on the interferer, so per interferer it factors out of the inner integrals
/// and the z0 integral reduces to a one-dimensional integral per v node.
class InterferenceKernel {
public:
  InterferenceKernel(double s, const ModelConfig& cfg, const QuadratureSpec& spec)
      : s_(s), radius_(cfg.disk.radius()), channel_(cfg.channel), spec_(spec) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("laplace_interference: s must be finite and >= 0");
    cfg.validate();
    spec.validate();
    tabulate();
  }

  double s() const { return s_; }

  /// Estimated integrand evaluations exceeded spec.eval_budget.
  bool budget_exceeded() const { return budget_exceeded_; }

  double laplace(ReceiverKind kind, std::size_t n_t) const {
    if (n_t == 0) throw std::invalid_argument("laplace_interference: n_t must be >= 1");
    const bool single_si = channel_.si_model == SelfInterferenceModel::single;
    if (n_t == 1 && (kind == ReceiverKind::hdrx || !single_si)) return 1.0;

    const double power = static_cast<double>(n_t - 1);
    const double si_count = single_si ? 1.0 : power;
    double total = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < t_.size(); ++j)
        row += wt_[j] * std::pow(base_[i * t_.size() + j], power);
      if (kind == ReceiverKind::fdtr) row *= self_interference_factor(v_[i], si_count);
      total += wv_[i] * row;
    }
    return total;
  }

private:
  void tabulate() {
    const double R = radius_;
    const double alpha = channel_.alpha;
    const std::size_t nv = spec_[QuadLevel::v];
    const std::size_t nt = spec_[QuadLevel::t];
    const std::size_t nphi = spec_[QuadLevel::angle];
    const std::size_t nz = spec_[QuadLevel::zi];

    const double evals = static_cast<double>(nv) * static_cast<double>(nt) *
                             static_cast<double>(nphi) * 2.0 * static_cast<double>(nz) +
                         static_cast<double>(nv) * 4.0 * static_cast<double>(spec_[QuadLevel::z0]);
    budget_exceeded_ = evals > spec_.eval_budget;

    // v and t are radii of uniform disk points: density 2r/R^2.
    tabulate_rule(0.0, R, nv, false, v_, wv_);
    for (std::size_t i = 0; i < nv; ++i) wv_[i] *= 2.0 * v_[i] / (R * R);
    tabulate_rule(0.0, R, nt, false, t_, wt_);
    for (std::size_t j = 0; j < nt; ++j) wt_[j] *= 2.0 * t_[j] / (R * R);

    // Angle variable: w^2 = v^2 + t^2 - 2vt cos(phi), phi uniform on (0, pi).
    std::vector<double> phi, wphi;
    tabulate_rule(0.0, std::numbers::pi, nphi, false, phi, wphi);
    for (double& w : wphi) w /= std::numbers::pi;

    base_.assign(nv * nt, 0.0);
    std::vector<double> zx, zw, za, zwt, x, w;
    std::vector<double> w_neg_alpha(nphi);
    for (std::size_t j = 0; j < nt; ++j) {
      const double t = t_[j];
      const DiskConfig disk(R);
      // z_i against both branches of the link-distance law, weights carry the density.
      zx.clear();
      zwt.clear();
      tabulate_rule(0.0, R - t, nz, false, x, w);
      for (std::size_t l = 0; l < x.size(); ++l) {
        zx.push_back(x[l]);
        zwt.push_back(w[l] * 2.0 * x[l] / (R * R));
      }
      tabulate_rule(R - t, R + t, nz, true, x, w);
      for (std::size_t l = 0; l < x.size(); ++l) {
        zx.push_back(x[l]);
        zwt.push_back(w[l] * pdf_link_distance(x[l], t, disk));
      }
      za.resize(zx.size());
      for (std::size_t l = 0; l < zx.size(); ++l) za[l] = std::pow(zx[l], alpha);

      for (std::size_t i = 0; i < nv; ++i) {
        const double v = v_[i];
        for (std::size_t k = 0; k < nphi; ++k)
          w_neg_alpha[k] = std::pow(interferer_distance_at_angle(v, t, phi[k]), -alpha);
        double acc = 0.0;
        for (std::size_t k = 0; k < nphi; ++k) {
          const double sw = s_ * w_neg_alpha[k];
          double inner = 0.0;
          for (std::size_t l = 0; l < za.size(); ++l) inner += zwt[l] / (1.0 + sw * za[l]);
          acc += wphi[k] * inner;
        }
        base_[i * nt + j] = acc;
      }
    }
  }

  // E over z0 | v of exp(-count * s * beta * z0^alpha).
  double self_interference_factor(double v, double count) const {
    const double c = count * s_ * channel_.beta;
    const double R = radius_;
    const double alpha = channel_.alpha;
    const std::size_t n = spec_[QuadLevel::z0];
    const DiskConfig disk(R);
    auto integrand = [&](double z) {
      return pdf_link_distance(z, v, disk) * std::exp(-c * std::pow(z, alpha));
    };
    // The decay scale c^(-1/alpha) becomes an extra panel boundary when it
    // falls inside a branch; exp(-3^alpha) beyond it is negligible.
    const double edge = c > 0.0 ? 3.0 * std::pow(c, -1.0 / alpha) : R + v + 1.0;
    auto panelled = [&](double a, double b, bool mapped) {
      auto one = [&](double lo, double hi) {
        return mapped ? integrate_1d_sqrt_endpoints(integrand, lo, hi, n)
                      : integrate_1d(integrand, lo, hi, n);
      };
      if (edge > a && edge < b) return one(a, edge) + one(edge, b);
      return one(a, b);
    };
    return panelled(0.0, R - v, false) + panelled(R - v, R + v, true);
  }

  double s_;
  double radius_;
  ChannelConfig channel_;
  QuadratureSpec spec_;
  bool budget_exceeded_ = false;
  std::vector<double> v_, wv_, t_, wt_;
  std::vector<double> base_;
};

/// Laplace transform of the interference seen by a receiver of the given kind
/// when n_t users transmit (n_t - 1 of them interfere).
inline double laplace_interference(double s, ReceiverKind kind, std::size_t n_t,
                                   const ModelConfig& cfg,
                                   const QuadratureSpec& spec = QuadratureSpec{}) {
  if (n_t == 0) throw std::invalid_argument("laplace_interference: n_t must be >= 1");
  return InterferenceKernel(s, cfg, spec).laplace(kind, n_t);
}

/// Probability that the user finds its content in its own cache: P_hit / N.
inline double success_probability_cache(const ModelConfig& cfg) {
  cfg.validate();
  return hitting_probability(cfg.profile, cfg.n_users) / static_cast<double>(cfg.n_users);
}

struct SuccessPoint {
  double p_total = 0.0;
  double p_cache = 0.0;
  double p_sir = 0.0;
  bool budget_warning = false;
};

enum class CurveSource { analytic, simulated };

struct SuccessCurve {
  std::vector<double> thetas;
  double p_cache = 0.0;
  std::vector<double> p_sir;
  std::vector<double> p_total;
  std::vector<double> ci_halfwidth;  // simulated source only
  CurveSource source = CurveSource::analytic;
  double pruned_mass = 0.0;          // binomial mass of skipped n_t terms
  bool budget_warning = false;
};

namespace detail {

// Sum over n_t = 1..N of f(n_t) [P_HDRX L_HDRX + P_FDTR L_FDTR]. Terms with
// mass below `prune_below` are skipped and their mass accumulated.
inline double sir_part(const InterferenceKernel& kernel, const ModeProbabilities& modes,
                       const TransmitterCountPmf& pmf, double prune_below, double& pruned) {
  double total = 0.0;
  pruned = 0.0;
  for (std::size_t n_t = 1; n_t < pmf.pmf.size(); ++n_t) {
    const double mass = pmf[n_t];
    if (mass < prune_below) {
      pruned += mass;
      continue;
    }
    total += mass * (modes.p_hdrx * kernel.laplace(ReceiverKind::hdrx, n_t) +
                     modes.p_fdtr * kernel.laplace(ReceiverKind::fdtr, n_t));
  }
  return total;
}

}  // namespace detail

/// Success probability of an arbitrary user at SIR threshold theta (linear).
inline SuccessPoint success_probability(const ModelConfig& cfg, double theta,
                                        const QuadratureSpec& spec = QuadratureSpec{}) {
  if (!(theta > 0.0)) throw std::invalid_argument("success_probability: theta must be > 0");
  cfg.validate();
  const auto modes = compute_mode_probabilities(cfg.profile, cfg.n_users);
  const auto pmf = transmitter_count_pmf(modes.p_tx, cfg.n_users);
  const InterferenceKernel kernel(theta, cfg, spec);

  SuccessPoint out;
  out.p_cache = success_probability_cache(cfg);
  double pruned = 0.0;
  out.p_sir = detail::sir_part(kernel, modes, pmf, 0.0, pruned);
  out.p_total = out.p_cache + out.p_sir;
  out.budget_warning = kernel.budget_exceeded();
  return out;
}

inline constexpr double kPmfPruneThreshold = 1e-12;

/// Analytic success probability over a sorted grid of thresholds (linear).
/// Grid points are independent and may be evaluated by `workers` threads.
inline SuccessCurve success_curve(const ModelConfig& cfg, const std::vector<double>& thetas,
                                  const QuadratureSpec& spec = QuadratureSpec{},
                                  std::size_t workers = 1) {
  cfg.validate();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0.0)) throw std::invalid_argument("success_curve: thetas must be > 0");
    if (i > 0 && thetas[i] < thetas[i - 1])
      throw std::invalid_argument("success_curve: thetas must be sorted ascending");
  }
  const auto modes = compute_mode_probabilities(cfg.profile, cfg.n_users);
  const auto pmf = transmitter_count_pmf(modes.p_tx, cfg.n_users);

  SuccessCurve curve;
  curve.source = CurveSource::analytic;
  curve.thetas = thetas;
  curve.p_cache = success_probability_cache(cfg);
  curve.p_sir.assign(thetas.size(), 0.0);
  curve.p_total.assign(thetas.size(), 0.0);
  std::vector<double> pruned(thetas.size(), 0.0);
  std::vector<char> warned(thetas.size(), 0);

  parallel_for(thetas.size(), workers, [&](std::size_t i) {
    const InterferenceKernel kernel(thetas[i], cfg, spec);
    curve.p_sir[i] = detail::sir_part(kernel, modes, pmf, kPmfPruneThreshold, pruned[i]);
    curve.p_total[i] = curve.p_cache + curve.p_sir[i];
    warned[i] = kernel.budget_exceeded();
  });
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    curve.pruned_mass = std::max(curve.pruned_mass, pruned[i]);
    curve.budget_warning = curve.budget_warning || warned[i];
  }
  return curve;
}

}  // namespace fdcache
