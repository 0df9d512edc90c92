#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "doctest.h"
#include "forcemap/liftmetrics.hpp"
#include "forcemap/staticscene.hpp"

using namespace forcemap;

namespace {

Eigen::Vector4d wxyz(const Eigen::Quaterniond& q) { return {q.w(), q.x(), q.y(), q.z()}; }

TrajectoryLog stationary_log(int frames) {
  TrajectoryLog log;
  for (int f = 0; f < frames; ++f) {
    TrajectoryFrame frame{f, {}};
    frame.bodies.push_back({"target", Vec3(0, 0, 0.05 + 0.01 * f), {1, 0, 0, 0}});
    frame.bodies.push_back({"a", Vec3(0.1, 0, 0.05), {1, 0, 0, 0}});
    frame.bodies.push_back({"b", Vec3(-0.1, 0, 0.05), wxyz(Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Vec3::UnitX())))});
    log.frames.push_back(frame);
  }
  return log;
}

BoxBody box(std::string id, Vec3 half, Vec3 pos, std::string support = kFloorId) {
  BoxBody b;
  b.id = std::move(id);
  b.half_extents = half;
  b.position = pos;
  b.support = std::move(support);
  return b;
}

}  // namespace

TEST_SUITE("liftmetrics") {

TEST_CASE("stationary bodies give zeros") {
  const auto report = displacement_metrics(stationary_log(5), "target");
  CHECK(report.bodies.size() == 2);
  CHECK(report.max_linear == 0.0);
  CHECK(report.max_angular == 0.0);
  CHECK(report.mean_linear == 0.0);
  CHECK(report.mean_angular == 0.0);
}

TEST_CASE("translate and return keeps the maximum") {
  auto log = stationary_log(5);
  log.frames[2].bodies[1].position += Vec3(0.03, 0, 0);
  const auto report = displacement_metrics(log, "target");
  CHECK(report.bodies[0].max_linear == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(report.max_linear == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(report.mean_linear == doctest::Approx(0.015).epsilon(1e-12));
}

TEST_CASE("quarter turn about z") {
  auto log = stationary_log(3);
  const Eigen::Quaterniond q0(1, 0, 0, 0);
  log.frames[1].bodies[1].quaternion = wxyz(Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ())));
  const auto report = displacement_metrics(log, "target");
  CHECK(std::abs(report.bodies[0].max_angular - std::numbers::pi / 2) <= 1e-6);
  CHECK(quaternion_angle(wxyz(q0), -wxyz(q0)) == 0.0);
}

TEST_CASE("unknown target is rejected") {
  try {
    displacement_metrics(stationary_log(2), "nobody");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownBody);
  }
}

TEST_CASE("a body missing later keeps its last pose with a warning") {
  auto log = stationary_log(4);
  log.frames[1].bodies[1].position += Vec3(0, 0.02, 0);
  log.frames[2].bodies.erase(log.frames[2].bodies.begin() + 1);
  log.frames[3].bodies.erase(log.frames[3].bodies.begin() + 1);
  Diagnostics diag;
  const auto report = displacement_metrics(log, "target", &diag);
  CHECK_FALSE(diag.empty());
  CHECK(report.bodies[0].max_linear == doctest::Approx(0.02));
}

TEST_CASE("metrics are invariant under a rigid transform of the whole log") {
  auto log = stationary_log(4);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (auto& f : log.frames)
    for (auto& b : f.bodies) {
      if (f.frame == 0) continue;
      b.position += 0.01 * Vec3(n(rng), n(rng), n(rng));
      const Eigen::Quaterniond q(b.quaternion[0], b.quaternion[1], b.quaternion[2], b.quaternion[3]);
      b.quaternion = wxyz((q * Eigen::Quaterniond(Eigen::AngleAxisd(0.2 * n(rng), Vec3(n(rng), n(rng), 1).normalized()))).normalized());
    }
  const auto base = displacement_metrics(log, "target");
  const Eigen::Quaterniond rot(Eigen::AngleAxisd(1.1, Vec3(1, 2, 3).normalized()));
  const Vec3 shift(0.4, -0.2, 0.9);
  for (auto& f : log.frames)
    for (auto& b : f.bodies) {
      b.position = rot * b.position + shift;
      const Eigen::Quaterniond q(b.quaternion[0], b.quaternion[1], b.quaternion[2], b.quaternion[3]);
      b.quaternion = wxyz(rot * q);
    }
  const auto moved = displacement_metrics(log, "target");
  CHECK(moved.max_linear == doctest::Approx(base.max_linear).epsilon(1e-9));
  CHECK(moved.max_angular == doctest::Approx(base.max_angular).epsilon(1e-6));
}

TEST_CASE("trajectory log validation and roundtrip") {
  auto log = stationary_log(3);
  std::stringstream io;
  write_trajectory(log, io);
  const auto back = read_trajectory(io);
  REQUIRE(back.frames.size() == 3);
  CHECK(back.frames[2].bodies[2].quaternion.isApprox(log.frames[2].bodies[2].quaternion));

  auto bad = log;
  bad.frames[0].frame = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = log;
  bad.frames[1].frame = 5;
  bad.frames[2].frame = 5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = log;
  bad.frames[1].bodies[0].quaternion = {1, 1, 0, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("isolated box lifting up disturbs nothing") {
  StackScene scene;
  scene.bodies.push_back(box("t", Vec3::Constant(0.03), {0, 0, 0.03}));
  scene.bodies.push_back(box("far", Vec3::Constant(0.03), {0.1, 0, 0.03}));
  CHECK(sweep_disturbance_proxy(scene, "t", Vec3::UnitZ()) == 0.0);
}

TEST_CASE("lifting a box from under another matches the overlap prism") {
  StackScene scene;
  scene.bodies.push_back(box("low", {0.04, 0.03, 0.02}, {0, 0, 0.02}));
  // top box offset so the footprints overlap in a 0.05 x 0.04 rectangle
  // (an overhang the generator would never produce; the proxy is pure geometry)
  scene.bodies.push_back(box("top", {0.035, 0.025, 0.05}, {0.045, 0.005, 0.09}, "low"));
  const double footprint = (0.04 - 0.01) * (0.03 - (-0.02));
  for (double travel : {0.01, 0.05, 0.08}) {
    CHECK(sweep_disturbance_proxy(scene, "low", Vec3::UnitZ(), travel) ==
          doctest::Approx(footprint * travel).epsilon(1e-12));
  }
  // past the obstacle's full height the volume saturates
  CHECK(sweep_disturbance_proxy(scene, "low", Vec3::UnitZ(), 0.2) == doctest::Approx(footprint * 0.1).epsilon(1e-12));
  // with a gap the first part of the travel is free
  scene.bodies[1].position.z() += 0.01;
  CHECK(sweep_disturbance_proxy(scene, "low", Vec3::UnitZ(), 0.05) ==
        doctest::Approx(footprint * 0.04).epsilon(1e-12));
}

TEST_CASE("proxy grows with travel and tolerates any direction") {
  const auto scene = generate_scene(11, 6, default_catalog());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (const auto& b : scene.bodies) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 d = Vec3(n(rng), n(rng), n(rng)).normalized();
      double previous = 0.0;
      for (double travel : {0.005, 0.01, 0.02, 0.04, 0.08}) {
        const double v = sweep_disturbance_proxy(scene, b.id, d, travel);
        REQUIRE(v >= previous - 1e-15);
        previous = v;
      }
    }
  }
  CHECK_THROWS_AS(sweep_disturbance_proxy(scene, "missing", Vec3::UnitZ()), Error);
  CHECK_THROWS_AS(sweep_disturbance_proxy(scene, scene.bodies[0].id, Vec3::Zero()), Error);
}

TEST_CASE("angle stratification") {
  auto plan = [](Vec3 d) {
    LiftPlan p;
    p.direction = d;
    return std::pair<LiftPlan, int>{p, 0};
  };
  const double a = 25.0 * std::numbers::pi / 180.0;
  auto strata = stratify_by_angle<int>({plan(Vec3::UnitZ()), plan(Vec3::UnitX()), plan({std::cos(a), 0, std::sin(a)})});
  CHECK(strata.beyond.size() == 1);
  CHECK(strata.beyond[0].first.direction == Vec3::UnitZ());
  CHECK(strata.within.size() == 2);
  CHECK(elevation_deg(Vec3::UnitZ()) == 90.0);
  CHECK(elevation_deg(Vec3::UnitX()) == 0.0);
  CHECK(elevation_deg({std::cos(a), 0, std::sin(a)}) == doctest::Approx(25.0));
  CHECK(elevation_deg({std::cos(a), 0, -std::sin(a)}) == doctest::Approx(25.0));
}

}  // TEST_SUITE
