#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "forcemap/grid.hpp"
#include "forcemap/planner.hpp"
#include "forcemap/staticscene.hpp"

namespace forcemap {

struct BodyPose {
  std::string id;
  Vec3 position = Vec3::Zero();
  Eigen::Vector4d quaternion{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z)
};

struct TrajectoryFrame {
  std::int64_t frame = 0;
  std::vector<BodyPose> bodies;
};

struct TrajectoryLog {
  std::vector<TrajectoryFrame> frames;

  /// Frames strictly increasing, frame 0 first, unit quaternions.
  void validate() const;
};

// One frame per line: {"frame", "bodies": [{"id", "position", "quaternion": [w,x,y,z]}]}
TrajectoryLog read_trajectory(std::istream& source);
void write_trajectory(const TrajectoryLog& log, std::ostream& sink);
TrajectoryLog read_trajectory_file(const std::filesystem::path& path);

struct BodyDisturbance {
  std::string id;
  double max_linear = 0.0;   // m
  double max_angular = 0.0;  // rad, geodesic
};

struct DisturbanceReport {
  std::string target;
  std::vector<BodyDisturbance> bodies;  // non-target bodies, frame-0 order
  double mean_linear = 0.0;
  double max_linear = 0.0;
  double mean_angular = 0.0;
  double max_angular = 0.0;
};

/// Geodesic angle between two unit quaternions, in [0, pi].
double quaternion_angle(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

/// Max displacement of every non-target body from its frame-0 pose.
DisturbanceReport displacement_metrics(const TrajectoryLog& log, const std::string& target_id,
                                       Diagnostics* diagnostics = nullptr);

inline constexpr double kDefaultTravel = 0.05;

/// Volume (m^3) of other bodies entered by the target box as it translates
/// `travel` meters along `direction`.
double sweep_disturbance_proxy(const StackScene& scene, const std::string& target_id,
                               const Vec3& direction, double travel = kDefaultTravel);

/// Angle in degrees between a direction and the horizontal plane.
inline double elevation_deg(const Vec3& d) {
  return std::asin(std::min(1.0, std::abs(d.z()) / d.norm())) * 180.0 / std::numbers::pi;
}

template <class Record>
struct AngleStrata {
  std::vector<std::pair<LiftPlan, Record>> within;  // elevation <= threshold
  std::vector<std::pair<LiftPlan, Record>> beyond;
};

/// Splits planned lifts by the angle their direction makes with the bottom
/// surface.
template <class Record>
AngleStrata<Record> stratify_by_angle(std::vector<std::pair<LiftPlan, Record>> plans,
                                      double threshold_deg = 30.0) {
  AngleStrata<Record> strata;
  for (auto& entry : plans) {
    if (elevation_deg(entry.first.direction) <= threshold_deg) {
      strata.within.push_back(std::move(entry));
    } else {
      strata.beyond.push_back(std::move(entry));
    }
  }
  return strata;
}

}  // namespace forcemap
