#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "forcemap/grid.hpp"
#include "forcemap/labelgen.hpp"

namespace forcemap {

/// Rotation by multiples of 90 degrees, stored as a signed permutation
/// matrix (entries in {-1, 0, 1}, determinant +1).
struct AxisRotation {
  std::array<std::array<int, 3>, 3> rows{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  void validate() const;
  Vec3 apply(const Vec3& v) const;
  /// World-frame half extents of a box with the given local half extents.
  Vec3 extents(const Vec3& local_half_extents) const;
  /// Unit quaternion (w, x, y, z).
  Eigen::Vector4d quaternion() const;

  bool operator==(const AxisRotation&) const = default;

  /// All 24 proper rotations of the cube, identity first.
  static const std::vector<AxisRotation>& all();
};

struct AxisBox {
  Vec3 lo;
  Vec3 hi;

  double volume() const;
};

inline constexpr const char* kFloorId = "floor";

struct BoxBody {
  std::string id;
  Vec3 half_extents{0.05, 0.05, 0.05};  // local frame
  Vec3 position = Vec3::Zero();         // box center
  AxisRotation rotation;
  double mass = 1.0;
  std::string support = kFloorId;  // supporting body id, or "floor"

  void validate() const;
  Vec3 world_half_extents() const { return rotation.extents(half_extents); }
  AxisBox bounds() const;
  double bottom() const { return position.z() - world_half_extents().z(); }
  double top() const { return position.z() + world_half_extents().z(); }
};

/// Open-top basket; interior spans [-half_x, half_x] x [-half_y, half_y]
/// x [0, height] with the floor at z = 0.
struct Basket {
  double half_x = 0.15;
  double half_y = 0.12;
  double height = 0.25;
};

struct StackScene {
  Basket basket;
  std::vector<BoxBody> bodies;
  double gravity = 9.81;

  /// Checks ids, support acyclicity and the full-support rule. Throws
  /// Error(InvalidScene).
  void validate() const;
  const BoxBody& body(const std::string& id) const;
  /// Bodies that rest directly on `id`.
  std::vector<std::string> supported_by(const std::string& id) const;
};

struct BoxTemplate {
  std::string name;
  Vec3 half_extents;
  double mass;
};

/// Box approximations of common grocery items (sizes and masses of the
/// YCB boxes and cans).
std::vector<BoxTemplate> default_catalog();

struct GenerationOptions {
  Basket basket;
  double gravity = 9.81;
  int max_retries = 64;
  // Probability that a placement aims at an existing body's top face.
  double stack_probability = 0.6;
  // Probability, per horizontal axis, of pushing the body flush to a wall.
  double wall_snap_probability = 0.2;
};

/// Sequential lowering of random boxes into the basket. Deterministic in
/// `seed`; placements that would break the full-support rule are retried and
/// finally dropped with a diagnostic.
StackScene generate_scene(std::uint64_t seed, int body_count,
                          const std::vector<BoxTemplate>& catalog,
                          const GenerationOptions& options = {},
                          Diagnostics* diagnostics = nullptr);

/// Quasi-static contact forces of a full-support stack: four corner contacts
/// per support interface sharing the transmitted weight, plus zero-force
/// corner contacts on faces flush with a basket wall.
ContactFrame solve_static_contacts(const StackScene& scene, std::int64_t frame = 0);

/// Weight carried by each body's support interface, keyed like scene.bodies.
std::vector<double> interface_loads(const StackScene& scene);

// Scene JSON document: {"basket": {half_x, half_y, height}, "gravity",
// "bodies": [{id, half_extents, position, rotation, mass, support}]}.
std::string scene_to_json(const StackScene& scene);
StackScene scene_from_json(const std::string& text);
void write_scene_file(const StackScene& scene, const std::filesystem::path& path);
StackScene read_scene_file(const std::filesystem::path& path);

}  // namespace forcemap
