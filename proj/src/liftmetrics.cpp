#include "forcemap/liftmetrics.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

namespace forcemap {

void TrajectoryLog::validate() const {
  if (frames.empty() || frames.front().frame != 0) {
    throw Error(ErrorKind::InvalidArgument, "trajectory log must start at frame 0");
  }
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (n > 0 && frames[n].frame <= frames[n - 1].frame) {
      throw Error(ErrorKind::InvalidArgument, "trajectory frames must be strictly increasing (frame " +
                                                  std::to_string(frames[n].frame) + ")");
    }
    for (const auto& pose : frames[n].bodies) {
      if (!pose.position.allFinite() || std::abs(pose.quaternion.norm() - 1.0) > 1e-6) {
        throw Error(ErrorKind::InvalidArgument, "frame " + std::to_string(frames[n].frame) +
                                                    ": body " + pose.id +
                                                    " has a non-finite position or non-unit quaternion");
      }
    }
  }
}

TrajectoryLog read_trajectory(std::istream& source) {
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      TrajectoryFrame frame;
      frame.frame = obj.at("frame").get<std::int64_t>();
      for (const auto& jb : obj.at("bodies")) {
        BodyPose pose;
        pose.id = jb.at("id").get<std::string>();
        const auto p = jb.at("position").get<std::array<double, 3>>();
        const auto q = jb.at("quaternion").get<std::array<double, 4>>();
        pose.position = Vec3(p[0], p[1], p[2]);
        pose.quaternion = Eigen::Vector4d(q[0], q[1], q[2], q[3]);
        frame.bodies.push_back(std::move(pose));
      }
      log.frames.push_back(std::move(frame));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, "trajectory line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  log.validate();
  return log;
}

void write_trajectory(const TrajectoryLog& log, std::ostream& sink) {
  for (const auto& frame : log.frames) {
    nlohmann::ordered_json obj;
    obj["frame"] = frame.frame;
    obj["bodies"] = nlohmann::ordered_json::array();
    for (const auto& pose : frame.bodies) {
      const auto& q = pose.quaternion;
      obj["bodies"].push_back({{"id", pose.id},
                               {"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
                               {"quaternion", {q[0], q[1], q[2], q[3]}}});
    }
    sink << obj.dump() << '\n';
  }
}

TrajectoryLog read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_trajectory(in);
}

double quaternion_angle(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  const double dot = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return 2.0 * std::acos(dot);
}

DisturbanceReport displacement_metrics(const TrajectoryLog& log, const std::string& target_id,
                                       Diagnostics* diagnostics) {
  log.validate();
  const auto& initial = log.frames.front().bodies;
  if (std::none_of(initial.begin(), initial.end(), [&](const BodyPose& p) { return p.id == target_id; })) {
    throw Error(ErrorKind::UnknownBody, "target '" + target_id + "' is not present at frame 0");
  }
  DisturbanceReport report;
  report.target = target_id;
  for (const auto& start : initial) {
    if (start.id == target_id) continue;
    BodyDisturbance d{start.id, 0.0, 0.0};
    BodyPose last = start;
    bool warned = false;
    for (const auto& frame : log.frames) {
      auto it = std::find_if(frame.bodies.begin(), frame.bodies.end(),
                             [&](const BodyPose& p) { return p.id == start.id; });
      if (it == frame.bodies.end()) {
        if (!warned) {
          note(diagnostics, "body " + start.id + " missing from frame " + std::to_string(frame.frame) +
                                "; using its last known pose");
          warned = true;
        }
      } else {
        last = *it;
      }
      d.max_linear = std::max(d.max_linear, (last.position - start.position).norm());
      d.max_angular = std::max(d.max_angular, quaternion_angle(last.quaternion, start.quaternion));
    }
    report.bodies.push_back(d);
  }
  if (!report.bodies.empty()) {
    for (const auto& b : report.bodies) {
      report.mean_linear += b.max_linear;
      report.mean_angular += b.max_angular;
      report.max_linear = std::max(report.max_linear, b.max_linear);
      report.max_angular = std::max(report.max_angular, b.max_angular);
    }
    report.mean_linear /= static_cast<double>(report.bodies.size());
    report.mean_angular /= static_cast<double>(report.bodies.size());
  }
  return report;
}

namespace {

// Length of [lo + t*v, hi + t*v] inside [olo, ohi].
double moving_overlap(double lo, double hi, double v, double olo, double ohi, double t) {
  return std::max(0.0, std::min(hi + t * v, ohi) - std::max(lo + t * v, olo));
}

// Volume of `obstacle` swept through by the front faces of `box` moving
// along unit `d` for t in [0, travel]. The integrand is piecewise quadratic
// in t, so Simpson's rule between breakpoints is exact.
double swept_entry_volume(const AxisBox& box, const Vec3& d, double travel, const AxisBox& obstacle) {
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) continue;
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double face = d[a] > 0.0 ? box.hi[a] : box.lo[a];

    std::vector<double> breaks{0.0, travel};
    auto add_break = [&](double target, double start, double rate) {
      if (rate == 0.0) return;
      const double t = (target - start) / rate;
      if (t > 0.0 && t < travel) breaks.push_back(t);
    };
    add_break(obstacle.lo[a], face, d[a]);
    add_break(obstacle.hi[a], face, d[a]);
    for (int axis : {b, c}) {
      for (double edge : {box.lo[axis], box.hi[axis]}) {
        add_break(obstacle.lo[axis], edge, d[axis]);
        add_break(obstacle.hi[axis], edge, d[axis]);
      }
    }
    std::sort(breaks.begin(), breaks.end());

    auto area = [&](double t) {
      return moving_overlap(box.lo[b], box.hi[b], d[b], obstacle.lo[b], obstacle.hi[b], t) *
             moving_overlap(box.lo[c], box.hi[c], d[c], obstacle.lo[c], obstacle.hi[c], t);
    };
    for (std::size_t n = 0; n + 1 < breaks.size(); ++n) {
      const double t0 = breaks[n];
      const double t1 = breaks[n + 1];
      if (t1 <= t0) continue;
      const double mid = 0.5 * (t0 + t1);
      // The face is inside the obstacle slab either for the whole piece or
      // not at all; the overlap lengths are continuous.
      const double plane = face + mid * d[a];
      if (plane <= obstacle.lo[a] || plane >= obstacle.hi[a]) continue;
      total += std::abs(d[a]) * (t1 - t0) / 6.0 * (area(t0) + 4.0 * area(mid) + area(t1));
    }
  }
  return total;
}

AxisBox intersect(const AxisBox& p, const AxisBox& q) {
  return {p.lo.cwiseMax(q.lo), p.hi.cwiseMin(q.hi)};
}

}  // namespace

double sweep_disturbance_proxy(const StackScene& scene, const std::string& target_id,
                               const Vec3& direction, double travel) {
  const BoxBody& target = scene.body(target_id);
  if (!(travel > 0.0) || !std::isfinite(travel)) {
    throw Error(ErrorKind::InvalidArgument, "sweep travel must be positive");
  }
  if (!direction.allFinite() || direction.norm() == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "sweep direction must be a non-zero vector");
  }
  const Vec3 d = direction.normalized();
  const AxisBox box = target.bounds();
  double volume = 0.0;
  for (const auto& other : scene.bodies) {
    if (other.id == target_id) continue;
    const AxisBox obstacle = other.bounds();
    volume += intersect(box, obstacle).volume();
    volume += swept_entry_volume(box, d, travel, obstacle);
  }
  return volume;
}

}  // namespace forcemap
