#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fdcache {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

inline GaussLegendreRule compute_gauss_legendre(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Cached rule for `n` points; thread-safe, references stay valid.
inline const GaussLegendreRule& gauss_legendre(std::size_t n) {
  if (n < 2) throw std::invalid_argument("gauss_legendre: need at least 2 nodes");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(detail::compute_gauss_legendre(n));
  return *slot;
}

/// Thrown when an integrand returns NaN or infinity.
class NonFiniteIntegrand : public std::runtime_error {
public:
  NonFiniteIntegrand(double abscissa, double value)
      : std::runtime_error("non-finite integrand value " + std::to_string(value) +
                           " at abscissa " + std::to_string(abscissa)),
        abscissa_(abscissa) {}
  double abscissa() const { return abscissa_; }

private:
  double abscissa_;
};

/// Gauss-Legendre estimate of the integral of f over [a, b].
template <class F>
double integrate_1d(F&& f, double a, double b, std::size_t nodes) {
  if (!(a <= b)) throw std::invalid_argument("integrate_1d: require a <= b");
  if (a == b) return 0.0;
  const auto& rule = gauss_legendre(nodes);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = mid + half * rule.nodes[i];
    const double fx = f(x);
    if (!std::isfinite(fx)) throw NonFiniteIntegrand(x, fx);
    sum += rule.weights[i] * fx;
  }
  return half * sum;
}

/// Integral over [a, b] after the substitution x = mid - half*cos(u). Removes
/// square-root behaviour at either endpoint, which plain Gauss-Legendre
/// resolves only algebraically.
template <class F>
double integrate_1d_sqrt_endpoints(F&& f, double a, double b, std::size_t nodes) {
  if (!(a <= b)) throw std::invalid_argument("integrate_1d_sqrt_endpoints: require a <= b");
  if (a == b) return 0.0;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  return integrate_1d(
      [&](double u) { return f(mid - half * std::cos(u)) * half * std::sin(u); }, 0.0,
      std::numbers::pi, nodes);
}

/// Fills `x` and `w` with the abscissae and weights of integrate_1d (or of
/// integrate_1d_sqrt_endpoints when `sqrt_endpoints`), so callers can reuse
/// one tabulation for many integrands.
inline void tabulate_rule(double a, double b, std::size_t nodes, bool sqrt_endpoints,
                          std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  if (!(a < b)) return;
  const auto& rule = gauss_legendre(nodes);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (sqrt_endpoints) {
      const double u = 0.5 * std::numbers::pi * (1.0 + rule.nodes[i]);
      x.push_back(mid - half * std::cos(u));
      w.push_back(0.5 * std::numbers::pi * rule.weights[i] * half * std::sin(u));
    } else {
      x.push_back(mid + half * rule.nodes[i]);
      w.push_back(half * rule.weights[i]);
    }
  }
}

/// Integration variables of the interference Laplace transform.
enum class QuadLevel : std::size_t { v = 0, t, z0, angle, zi };

inline constexpr std::array<std::string_view, 5> kQuadLevelNames = {"v", "t", "z0", "angle",
                                                                    "zi"};

inline std::optional<QuadLevel> parse_quad_level(std::string_view name) {
  if (name == "w" || name == "phi") return QuadLevel::angle;
  for (std::size_t i = 0; i < kQuadLevelNames.size(); ++i)
    if (kQuadLevelNames[i] == name) return static_cast<QuadLevel>(i);
  return std::nullopt;
}

/// Per-level node counts of the tensor Gauss-Legendre rule.
struct QuadratureSpec {
  std::array<std::size_t, 5> nodes = {24, 24, 24, 32, 24};
  double rel_tol = 1e-6;
  std::size_t max_nodes_per_level = 512;
  double eval_budget = 1e9;

  std::size_t& operator[](QuadLevel level) { return nodes[static_cast<std::size_t>(level)]; }
  std::size_t operator[](QuadLevel level) const {
    return nodes[static_cast<std::size_t>(level)];
  }

  void validate() const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] < 4)
        throw std::invalid_argument("QuadratureSpec: level '" +
                                    std::string(kQuadLevelNames[i]) + "' needs >= 4 nodes");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
  }

  QuadratureSpec doubled() const {
    QuadratureSpec next = *this;
    for (auto& n : next.nodes) n *= 2;
    return next;
  }

  bool within_budget() const {
    return std::all_of(nodes.begin(), nodes.end(),
                       [&](std::size_t n) { return n <= max_nodes_per_level; });
  }
};

struct RefineResult {
  double value = 0.0;
  double previous = 0.0;
  double rel_delta = 0.0;
  bool converged = false;
  QuadratureSpec final_spec;
};

/// Re-evaluates `estimate` with doubled node counts until two successive
/// values agree to spec.rel_tol or the per-level node cap would be exceeded.
/// On exhaustion `converged` is false and both last estimates are returned.
template <class Estimate>
RefineResult refine_until(Estimate&& estimate, const QuadratureSpec& spec) {
  spec.validate();
  RefineResult out;
  QuadratureSpec current = spec;
  double prev = estimate(current);
  out.value = prev;
  out.previous = prev;
  out.final_spec = current;
  for (;;) {
    QuadratureSpec next = current.doubled();
    if (!next.within_budget()) {
      out.converged = false;
      return out;
    }
    const double value = estimate(next);
    const double scale = std::max(std::abs(value), std::abs(prev));
    const double delta = scale == 0.0 ? 0.0 : std::abs(value - prev) / scale;
    out.previous = prev;
    out.value = value;
    out.rel_delta = delta;
    out.final_spec = next;
    if (delta < spec.rel_tol) {
      out.converged = true;
      return out;
    }
    prev = value;
    current = next;
  }
}

}  // namespace fdcache
