#pragma once

// Test-only reference computations. Nothing here calls into the library's
// gradient / planner / KDE code paths, so the tests can compare against it.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "forcemap/grid.hpp"
#include "forcemap/labelgen.hpp"

namespace oracle {

using forcemap::ForceMap;
using forcemap::GridSpec;
using forcemap::Vec3;

inline double gaussian_kernel(const Vec3& offset, double sigma) {
  return std::pow(2.0 * std::numbers::pi, -1.5) * std::exp(-offset.squaredNorm() / (2.0 * sigma * sigma));
}

/// Force-weighted KDE at a single point, evaluated directly with no
/// truncation.
inline double kde_at(const Vec3& x, const std::vector<forcemap::ContactPoint>& contacts, double h,
                     double sigma) {
  double sum = 0.0;
  for (const auto& c : contacts) sum += c.force * gaussian_kernel((x - c.position) / sigma, 1.0);
  return sum / (static_cast<double>(contacts.size()) * h * h * h);
}

/// Map sampled from amplitude * exp(-|x - mu|^2 / (2 sigma^2)).
inline ForceMap gaussian_blob_map(const GridSpec& spec, const Vec3& mu, double sigma, double amplitude) {
  ForceMap map(spec);
  for (std::uint32_t k = 0; k < spec.dims[2]; ++k) {
    for (std::uint32_t j = 0; j < spec.dims[1]; ++j) {
      for (std::uint32_t i = 0; i < spec.dims[0]; ++i) {
        const Vec3 x = spec.origin + spec.spacing * Vec3(i, j, k);
        map.at(i, j, k) += amplitude * std::exp(-(x - mu).squaredNorm() / (2.0 * sigma * sigma));
      }
    }
  }
  return map;
}

inline Vec3 gaussian_blob_gradient(const Vec3& x, const Vec3& mu, double sigma, double amplitude) {
  return -amplitude * (x - mu) / (sigma * sigma) *
         std::exp(-(x - mu).squaredNorm() / (2.0 * sigma * sigma));
}

/// Dense direction set: golden-angle spiral with `count` points.
inline std::vector<Vec3> spiral_directions(std::size_t count) {
  std::vector<Vec3> dirs;
  dirs.reserve(count);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t n = 0; n < count; ++n) {
    const double z = 1.0 - 2.0 * (static_cast<double>(n) + 0.5) / static_cast<double>(count);
    const double r = std::sqrt(1.0 - z * z);
    const double theta = golden_angle * static_cast<double>(n);
    dirs.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
  }
  return dirs;
}

/// Lift-cost integrand samples computed from scratch: central / one-sided
/// differences, outward restriction, sphere membership, sign.
struct BruteCost {
  std::vector<Vec3> grads;
  double slope;
  double volume;

  BruteCost(const ForceMap& map, const Vec3& c, double radius, double leaky_slope, double sign)
      : slope(leaky_slope), volume(std::pow(map.spec().spacing, 3)) {
    const GridSpec& s = map.spec();
    const double h = s.spacing;
    auto v = [&](long i, long j, long k) { return map.at(i, j, k); };
    auto diff = [&](long n, long count, auto at) {
      if (n == 0) return (at(1) - at(0)) / h;
      if (n == count - 1) return (at(n) - at(n - 1)) / h;
      return (at(n + 1) - at(n - 1)) / (2.0 * h);
    };
    const long nx = s.dims[0], ny = s.dims[1], nz = s.dims[2];
    for (long k = 0; k < nz; ++k) {
      for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) {
          const Vec3 x = s.origin + h * Vec3(i, j, k);
          if ((x - c).norm() > radius) continue;
          Vec3 g(diff(i, nx, [&](long m) { return v(m, j, k); }),
                 diff(j, ny, [&](long m) { return v(i, m, k); }),
                 diff(k, nz, [&](long m) { return v(i, j, m); }));
          if (g.dot(x - c) < 0.0) continue;
          grads.push_back(sign * g);
        }
      }
    }
  }

  double operator()(const Vec3& d) const {
    double sum = 0.0;
    for (const auto& g : grads) {
      const double t = g.dot(d);
      sum += t >= 0.0 ? t : slope * t;
    }
    return sum * volume;
  }

  double scale() const {
    double sum = 0.0;
    for (const auto& g : grads) sum += g.norm();
    return sum * volume;
  }

  struct Minimum {
    Vec3 direction;
    double cost;
  };

  Minimum minimize(const std::vector<Vec3>& directions) const {
    Minimum best{directions.front(), (*this)(directions.front())};
    for (const auto& d : directions) {
      const double value = (*this)(d);
      if (value < best.cost) best = {d, value};
    }
    return best;
  }
};

inline double angle_deg(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

}  // namespace oracle
