#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "forcemap/grid.hpp"

namespace forcemap {

/// One sparse contact sample as emitted by a rigid-body engine.
struct ContactPoint {
  Vec3 position = Vec3::Zero();
  double force = 0.0;  // magnitude, N
  Vec3 normal = Vec3::UnitZ();
  std::int64_t frame = 0;
  std::string body_a;
  std::string body_b;

  void validate() const;

  bool operator==(const ContactPoint& other) const = default;
};

struct ContactFrame {
  std::int64_t frame = 0;
  std::vector<ContactPoint> contacts;
};

enum class KdeNormalization {
  AsPrinted,  // 1 / (n h^3), kernel argument (x - x_i) / sigma
  Textbook,   // 1 / (n sigma^3)
};

struct KdeParams {
  double sigma = 0.012;
  // Kernel is evaluated out to this many sigmas and is zero beyond.
  double truncation_sigmas = 4.0;
  // Contacts farther than this from the voxel-center box raise a diagnostic.
  // Negative means "truncation radius".
  double influence_margin = -1.0;
  KdeNormalization normalization = KdeNormalization::AsPrinted;

  void validate() const;
  double margin() const { return influence_margin < 0.0 ? truncation_sigmas * sigma : influence_margin; }
};

inline constexpr int kDefaultTemporalWindow = 5;

/// Force-weighted Gaussian KDE of a contact frame on the grid. The output is
/// deliberately unnormalized; an empty frame yields the all-zero map.
ForceMap kde_voxelize(const ContactFrame& frame, const GridSpec& spec, const KdeParams& params,
                      Diagnostics* diagnostics = nullptr);

/// Trailing moving average: output[t] is the voxelwise mean of inputs
/// max(0, t - window + 1) .. t.
std::vector<ForceMap> temporal_average(std::span<const ForceMap> maps, int window);

/// Canonical accumulation order: frame, body_a, body_b, position.
void sort_contacts(std::vector<ContactPoint>& contacts);

/// Groups contacts by frame (ascending); contacts inside a frame keep their
/// input order.
std::vector<ContactFrame> group_frames(std::vector<ContactPoint> contacts);

// Contact log, JSON Lines: one object per line with keys frame, body_a,
// body_b, position [x,y,z], force, normal [x,y,z]. Blank lines are ignored.
std::vector<ContactFrame> read_contacts(std::istream& source);
void write_contacts(std::span<const ContactFrame> frames, std::ostream& sink);

std::vector<ContactFrame> read_contacts_file(const std::filesystem::path& path);
void write_contacts_file(std::span<const ContactFrame> frames, const std::filesystem::path& path);

}  // namespace forcemap
