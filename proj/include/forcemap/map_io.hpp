#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "forcemap/grid.hpp"

namespace forcemap {

// Binary force-map container ("FMAP", version 1). Layout, little-endian:
//   magic "FMAP" | u16 version | u16 reserved | u32 dims[3] | f64 origin[3]
//   | f64 spacing | i64 frame (-1 if absent) | f32 values[nx*ny*nz], x-fastest
inline constexpr std::uint16_t kMapFormatVersion = 1;
inline constexpr std::size_t kMapHeaderBytes = 60;

std::vector<std::uint8_t> encode_map(const ForceMap& map);
ForceMap decode_map(const std::vector<std::uint8_t>& bytes);

void write_map(const ForceMap& map, std::ostream& sink);
ForceMap read_map(std::istream& source);

void write_map_file(const ForceMap& map, const std::filesystem::path& path);
ForceMap read_map_file(const std::filesystem::path& path);

/// Linear value -> 16-bit intensity mapping used by the PNG slice export:
/// value = offset + scale * intensity.
struct IntensityScaling {
  double offset = 0.0;
  double scale = 0.0;
};

IntensityScaling intensity_scaling_for(const ForceMap& map);

/// Writes channel_000.png ... (one 16-bit grayscale PNG per z slice) and
/// slices.json into `directory`. Returns the written paths, sidecar last.
std::vector<std::filesystem::path> export_png_slices(const ForceMap& map,
                                                     const std::filesystem::path& directory);

/// ASCII PLY 1.0 point cloud of voxel centers whose value reaches
/// `threshold_fraction` of the map maximum, colored by magnitude.
std::string ply_point_cloud(const ForceMap& map, double threshold_fraction);

}  // namespace forcemap
