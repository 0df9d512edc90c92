#include "forcemap/map_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <png.h>

#include <nlohmann/json.hpp>

namespace forcemap {
namespace {

constexpr std::array<char, 4> kMagic{'F', 'M', 'A', 'P'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  out.insert(out.end(), raw.begin(), raw.end());
}

template <class T>
T get_le(const std::uint8_t* in) {
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::copy(in, in + sizeof(T), raw.begin());
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_map(const ForceMap& map) {
  const GridSpec& spec = map.spec();
  std::vector<std::uint8_t> out;
  out.reserve(kMapHeaderBytes + spec.voxel_count() * sizeof(float));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(out, kMapFormatVersion);
  put_le<std::uint16_t>(out, 0);
  for (auto d : spec.dims) put_le<std::uint32_t>(out, d);
  for (int a = 0; a < 3; ++a) put_le<double>(out, spec.origin[a]);
  put_le<double>(out, spec.spacing);
  put_le<std::int64_t>(out, map.frame().value_or(-1));
  for (double v : map.values()) put_le<float>(out, static_cast<float>(v));
  return out;
}

ForceMap decode_map(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorKind::BadMagic, "not a force-map file (bad magic)");
  }
  if (bytes.size() < kMapHeaderBytes) {
    throw Error(ErrorKind::Truncated, "force-map header truncated at " +
                                          std::to_string(bytes.size()) + " bytes");
  }
  const std::uint8_t* p = bytes.data() + 4;
  const auto version = get_le<std::uint16_t>(p);
  if (version != kMapFormatVersion) {
    throw Error(ErrorKind::VersionMismatch,
                "unsupported force-map version " + std::to_string(version));
  }
  p += 4;  // version + reserved
  GridSpec spec;
  for (auto& d : spec.dims) {
    d = get_le<std::uint32_t>(p);
    p += 4;
  }
  for (int a = 0; a < 3; ++a, p += 8) spec.origin[a] = get_le<double>(p);
  spec.spacing = get_le<double>(p);
  p += 8;
  const auto frame = get_le<std::int64_t>(p);
  spec.validate();

  const std::size_t count = spec.voxel_count();
  const std::size_t expected = kMapHeaderBytes + count * sizeof(float);
  if (bytes.size() < expected) {
    throw Error(ErrorKind::Truncated, "force-map payload truncated: " +
                                          std::to_string(bytes.size()) + " of " +
                                          std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) {
    throw Error(ErrorKind::TrailingData, "force-map file has " +
                                             std::to_string(bytes.size() - expected) +
                                             " trailing bytes");
  }
  std::vector<double> values(count);
  const std::uint8_t* payload = bytes.data() + kMapHeaderBytes;
  for (std::size_t n = 0; n < count; ++n) {
    const float v = get_le<float>(payload + n * sizeof(float));
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFinite,
                  "non-finite force-map value at voxel " + std::to_string(n));
    }
    values[n] = v;
  }
  std::optional<std::int64_t> frame_index;
  if (frame != -1) frame_index = frame;
  return ForceMap(spec, std::move(values), frame_index);
}

void write_map(const ForceMap& map, std::ostream& sink) {
  const auto bytes = encode_map(map);
  sink.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error(ErrorKind::Io, "failed writing force map");
}

ForceMap read_map(std::istream& source) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(source),
                                  std::istreambuf_iterator<char>()};
  return decode_map(bytes);
}

void write_map_file(const ForceMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_map(map, out);
}

ForceMap read_map_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_map(in);
}

IntensityScaling intensity_scaling_for(const ForceMap& map) {
  const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  IntensityScaling s;
  s.offset = *lo;
  s.scale = (*hi > *lo) ? (*hi - *lo) / 65535.0 : 0.0;
  return s;
}

namespace {

void write_png16(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height,
                 const std::vector<std::uint16_t>& pixels) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (fp == nullptr) throw Error(ErrorKind::Io, "cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorKind::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(std::size_t{width} * 2);
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::uint16_t v = pixels[std::size_t{y} * width + x];
      row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
      row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw Error(ErrorKind::Io, "failed closing " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> export_png_slices(const ForceMap& map,
                                                     const std::filesystem::path& directory) {
  const GridSpec& spec = map.spec();
  const IntensityScaling scaling = intensity_scaling_for(map);
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  std::vector<std::uint16_t> pixels(std::size_t{spec.dims[0]} * spec.dims[1]);
  for (std::uint32_t k = 0; k < spec.dims[2]; ++k) {
    for (std::uint32_t j = 0; j < spec.dims[1]; ++j) {
      for (std::uint32_t i = 0; i < spec.dims[0]; ++i) {
        double level = 0.0;
        if (scaling.scale > 0.0) level = std::round((map.at(i, j, k) - scaling.offset) / scaling.scale);
        pixels[std::size_t{j} * spec.dims[0] + i] =
            static_cast<std::uint16_t>(std::clamp(level, 0.0, 65535.0));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "channel_%03u.png", k);
    written.push_back(directory / name);
    write_png16(written.back(), spec.dims[0], spec.dims[1], pixels);
  }

  nlohmann::json sidecar;
  sidecar["dims"] = spec.dims;
  sidecar["origin"] = {spec.origin.x(), spec.origin.y(), spec.origin.z()};
  sidecar["spacing"] = spec.spacing;
  sidecar["frame"] = map.frame().value_or(-1);
  sidecar["channel_axis"] = "z";
  sidecar["bit_depth"] = 16;
  sidecar["value_offset"] = scaling.offset;
  sidecar["value_per_intensity"] = scaling.scale;
  sidecar["files"] = nlohmann::json::array();
  for (const auto& p : written) sidecar["files"].push_back(p.filename().string());
  written.push_back(directory / "slices.json");
  std::ofstream out(written.back(), std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + written.back().string());
  out << sidecar.dump(2) << '\n';
  return written;
}

namespace {

// Piecewise-linear jet colormap on [0,1].
std::array<int, 3> jet(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto channel = [t](double center) {
    return std::clamp(1.5 - std::abs(4.0 * t - center), 0.0, 1.0);
  };
  return {static_cast<int>(std::lround(255.0 * channel(3.0))),
          static_cast<int>(std::lround(255.0 * channel(2.0))),
          static_cast<int>(std::lround(255.0 * channel(1.0)))};
}

}  // namespace

std::string ply_point_cloud(const ForceMap& map, double threshold_fraction) {
  const GridSpec& spec = map.spec();
  const double peak = map.max_value();
  const double threshold = threshold_fraction * peak;
  std::ostringstream body;
  std::size_t count = 0;
  if (peak > 0.0) {
    char line[128];
    for (std::uint32_t k = 0; k < spec.dims[2]; ++k) {
      for (std::uint32_t j = 0; j < spec.dims[1]; ++j) {
        for (std::uint32_t i = 0; i < spec.dims[0]; ++i) {
          const double v = map.at(i, j, k);
          if (v <= 0.0 || v < threshold) continue;
          const Vec3 p = spec.center(i, j, k);
          const auto rgb = jet(v / peak);
          std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %d %d %d\n", p.x(), p.y(), p.z(),
                        rgb[0], rgb[1], rgb[2]);
          body << line;
          ++count;
        }
      }
    }
  }
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\ncomment force map voxels >= " << threshold_fraction
      << " of max\nelement vertex " << count
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
      << body.str();
  return out.str();
}

}  // namespace forcemap
