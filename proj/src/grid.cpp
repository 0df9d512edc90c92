#include "forcemap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace forcemap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::BadMagic: return "bad_magic";
    case ErrorKind::VersionMismatch: return "version_mismatch";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::TrailingData: return "trailing_data";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    case ErrorKind::UnknownBody: return "unknown_body";
    case ErrorKind::InvalidScene: return "invalid_scene";
    case ErrorKind::OutsideGrid: return "outside_grid";
  }
  return "unknown";
}

void GridSpec::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] < 2) {
      throw Error(ErrorKind::InvalidArgument,
                  "grid dims must be >= 2 on every axis (axis " + std::to_string(axis) +
                      " has " + std::to_string(dims[axis]) + ")");
    }
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive and finite");
  }
  if (!origin.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "grid origin must be finite");
  }
}

ForceMap::ForceMap(GridSpec spec, std::optional<std::int64_t> frame)
    : spec_(std::move(spec)), frame_(frame) {
  spec_.validate();
  values_.assign(spec_.voxel_count(), 0.0);
}

ForceMap::ForceMap(GridSpec spec, std::vector<double> values,
                   std::optional<std::int64_t> frame)
    : spec_(std::move(spec)), values_(std::move(values)), frame_(frame) {
  spec_.validate();
  if (values_.size() != spec_.voxel_count()) {
    throw Error(ErrorKind::DimensionMismatch,
                "force map has " + std::to_string(values_.size()) + " values, grid needs " +
                    std::to_string(spec_.voxel_count()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "force map value is not finite");
  }
}

double ForceMap::max_value() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

MultiChannelImage slice_to_channels(const ForceMap& map) {
  const GridSpec& spec = map.spec();
  MultiChannelImage image;
  image.width = spec.dims[0];
  image.height = spec.dims[1];
  image.channels = spec.dims[2];
  image.spec = spec;
  image.frame = map.frame();
  image.values.resize(spec.voxel_count());
  for (std::size_t k = 0; k < spec.dims[2]; ++k) {
    for (std::size_t j = 0; j < spec.dims[1]; ++j) {
      for (std::size_t i = 0; i < spec.dims[0]; ++i) {
        image.values[(j * image.width + i) * image.channels + k] = map.at(i, j, k);
      }
    }
  }
  return image;
}

ForceMap channels_to_map(const MultiChannelImage& image) {
  const GridSpec& spec = image.spec;
  if (image.width != spec.dims[0] || image.height != spec.dims[1] ||
      image.channels != spec.dims[2]) {
    throw Error(ErrorKind::DimensionMismatch,
                "image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    "x" + std::to_string(image.channels) + " but its grid spec is " +
                    std::to_string(spec.dims[0]) + "x" + std::to_string(spec.dims[1]) + "x" +
                    std::to_string(spec.dims[2]));
  }
  if (image.values.size() != spec.voxel_count()) {
    throw Error(ErrorKind::DimensionMismatch,
                "image holds " + std::to_string(image.values.size()) + " values, expected " +
                    std::to_string(spec.voxel_count()));
  }
  std::vector<double> values(spec.voxel_count());
  for (std::size_t k = 0; k < spec.dims[2]; ++k) {
    for (std::size_t j = 0; j < spec.dims[1]; ++j) {
      for (std::size_t i = 0; i < spec.dims[0]; ++i) {
        values[spec.linear(i, j, k)] = image.channel(i, j, k);
      }
    }
  }
  return ForceMap(spec, std::move(values), image.frame);
}

namespace {

// Derivative along one axis at index `n` of a line with `count` samples.
// `value(m)` returns the sample at index m on that line.
template <class Sample>
double axis_difference(std::size_t n, std::size_t count, double h, Sample value) {
  if (n == 0) return (value(1) - value(0)) / h;
  if (n + 1 == count) return (value(n) - value(n - 1)) / h;
  return (value(n + 1) - value(n - 1)) / (2.0 * h);
}

}  // namespace

GradientField gradient(const ForceMap& map) {
  const GridSpec& spec = map.spec();
  spec.validate();
  GradientField field(spec);
  const double h = spec.spacing;
  const auto [nx, ny, nz] = spec.dims;
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        Vec3& g = field.at(i, j, k);
        g.x() = axis_difference(i, nx, h, [&](std::size_t m) { return map.at(m, j, k); });
        g.y() = axis_difference(j, ny, h, [&](std::size_t m) { return map.at(i, m, k); });
        g.z() = axis_difference(k, nz, h, [&](std::size_t m) { return map.at(i, j, m); });
      }
    }
  }
  return field;
}

}  // namespace forcemap
