#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fdcache {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Point2D& a, const Point2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Deployment region: a disk of the given radius centred at the origin.
class DiskConfig {
public:
  explicit DiskConfig(double radius) : radius_(radius) {
    if (!(std::isfinite(radius) && radius > 0.0))
      throw std::invalid_argument("DiskConfig: radius must be positive and finite");
  }
  double radius() const { return radius_; }

private:
  double radius_;
};

template <class Rng>
Point2D sample_uniform_disk(const DiskConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double r = cfg.radius() * std::sqrt(u01(rng));
  const double a = 2.0 * std::numbers::pi * u01(rng);
  return {r * std::cos(a), r * std::sin(a)};
}

/// Density of the distance from a fixed point at radius q to a uniform point
/// of the disk. Branch 1 covers [0, R-q], branch 2 covers (R-q, R+q].
inline double pdf_link_distance(double z, double q, const DiskConfig& cfg) {
  const double R = cfg.radius();
  if (!(z >= 0.0) || !(q >= 0.0))
    throw std::invalid_argument("pdf_link_distance: z and q must be nonnegative");
  if (q > R) throw std::invalid_argument("pdf_link_distance: q exceeds the disk radius");

  if (z <= R - q) return 2.0 * z / (R * R);
  if (z > R + q || q == 0.0) return 0.0;
  const double c = std::clamp((z * z + q * q - R * R) / (2.0 * q * z), -1.0, 1.0);
  return 2.0 * z / (std::numbers::pi * R * R) * std::acos(c);
}

/// Density of the distance between two points at radii v and t whose relative
/// angle is uniform, supported on (|v-t|, v+t).
inline double pdf_interferer_distance(double w, double v, double t) {
  if (!(v > 0.0) || !(t > 0.0))
    throw std::invalid_argument("pdf_interferer_distance: v and t must be positive");
  if (!(w > std::abs(v - t) && w < v + t)) return 0.0;
  const double c = (v * v + t * t - w * w) / (2.0 * v * t);
  const double s = 1.0 - c * c;
  if (!(s > 0.0)) return 0.0;
  return (w / (v * t)) / (std::numbers::pi * std::sqrt(s));
}

/// Distance between points at radii v and t separated by angle phi.
inline double interferer_distance_at_angle(double v, double t, double phi) {
  return std::sqrt(std::max(0.0, v * v + t * t - 2.0 * v * t * std::cos(phi)));
}

template <class Rng>
double sample_interferer_distance(double v, double t, Rng& rng) {
  if (!(v > 0.0) || !(t > 0.0))
    throw std::invalid_argument("sample_interferer_distance: v and t must be positive");
  const double phi = std::uniform_real_distribution<double>(0.0, std::numbers::pi)(rng);
  return interferer_distance_at_angle(v, t, phi);
}

}  // namespace fdcache
