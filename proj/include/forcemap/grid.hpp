#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "forcemap/error.hpp"

namespace forcemap {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<std::size_t, 3>;

/// Grid spacing used for force maps unless configured otherwise (5.75 mm).
inline constexpr double kDefaultSpacing = 0.00575;
inline constexpr std::uint32_t kDefaultDim = 64;

/// Uniform voxel grid. `origin` is the world position of the center of
/// voxel (0,0,0); voxel (i,j,k) sits at origin + spacing * (i,j,k).
struct GridSpec {
  std::array<std::uint32_t, 3> dims{kDefaultDim, kDefaultDim, kDefaultDim};
  Vec3 origin = Vec3::Zero();
  double spacing = kDefaultSpacing;

  /// Throws Error(InvalidArgument) unless spacing > 0 and every dim >= 2.
  void validate() const;

  std::size_t voxel_count() const {
    return std::size_t{dims[0]} * dims[1] * dims[2];
  }

  // x-fastest linear index, matching the on-disk order.
  std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims[0] * (j + std::size_t{dims[1]} * k);
  }

  Index3 unlinear(std::size_t index) const {
    const std::size_t i = index % dims[0];
    const std::size_t rest = index / dims[0];
    return {i, rest % dims[1], rest / dims[1]};
  }

  Vec3 center(std::size_t i, std::size_t j, std::size_t k) const {
    return origin + spacing * Vec3(static_cast<double>(i), static_cast<double>(j),
                                   static_cast<double>(k));
  }

  /// Corner of the box spanned by the voxel centers.
  Vec3 upper_center() const {
    return center(dims[0] - 1, dims[1] - 1, dims[2] - 1);
  }

  double voxel_volume() const { return spacing * spacing * spacing; }

  bool operator==(const GridSpec& other) const {
    return dims == other.dims && origin == other.origin && spacing == other.spacing;
  }
};

/// Dense scalar force-density field over a GridSpec.
class ForceMap {
 public:
  ForceMap() = default;
  explicit ForceMap(GridSpec spec, std::optional<std::int64_t> frame = std::nullopt);
  ForceMap(GridSpec spec, std::vector<double> values,
           std::optional<std::int64_t> frame = std::nullopt);

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::optional<std::int64_t> frame() const { return frame_; }
  void set_frame(std::optional<std::int64_t> frame) { frame_ = frame; }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[spec_.linear(i, j, k)];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return values_[spec_.linear(i, j, k)];
  }

  double max_value() const;

  bool operator==(const ForceMap& other) const = default;

 private:
  GridSpec spec_;
  std::vector<double> values_;
  std::optional<std::int64_t> frame_;
};

/// Force map viewed as an image of width nx, height ny and nz channels.
/// Storage is pixel-major: channel c of pixel (i,j) lives at
/// ((j * width) + i) * channels + c.
struct MultiChannelImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<double> values;
  GridSpec spec;
  std::optional<std::int64_t> frame;

  double channel(std::size_t i, std::size_t j, std::size_t c) const {
    return values[(j * width + i) * channels + c];
  }
};

MultiChannelImage slice_to_channels(const ForceMap& map);

/// Inverse of slice_to_channels. Throws Error(DimensionMismatch) when the
/// image shape disagrees with its spec.
ForceMap channels_to_map(const MultiChannelImage& image);

class GradientField {
 public:
  GradientField() = default;
  explicit GradientField(GridSpec spec)
      : spec_(std::move(spec)), vectors_(spec_.voxel_count(), Vec3::Zero()) {}

  const GridSpec& spec() const { return spec_; }
  const std::vector<Vec3>& vectors() const { return vectors_; }
  std::vector<Vec3>& vectors() { return vectors_; }

  const Vec3& at(std::size_t i, std::size_t j, std::size_t k) const {
    return vectors_[spec_.linear(i, j, k)];
  }
  Vec3& at(std::size_t i, std::size_t j, std::size_t k) {
    return vectors_[spec_.linear(i, j, k)];
  }

 private:
  GridSpec spec_;
  std::vector<Vec3> vectors_;
};

/// Central differences in the interior, one-sided first-order differences on
/// the boundary planes.
GradientField gradient(const ForceMap& map);

}  // namespace forcemap
