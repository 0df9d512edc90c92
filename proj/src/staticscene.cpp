#include "forcemap/staticscene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace forcemap {
namespace {

constexpr double kContactTol = 1e-9;

int determinant(const std::array<std::array<int, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Portable uniform draws; std distributions differ across standard libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t count) { return static_cast<std::size_t>(engine_() % count); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

double overlap_1d(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

bool footprint_contains(const AxisBox& outer, const AxisBox& inner) {
  return inner.lo.x() >= outer.lo.x() - kContactTol && inner.hi.x() <= outer.hi.x() + kContactTol &&
         inner.lo.y() >= outer.lo.y() - kContactTol && inner.hi.y() <= outer.hi.y() + kContactTol;
}

}  // namespace

void AxisRotation::validate() const {
  for (int r = 0; r < 3; ++r) {
    int nonzero_row = 0;
    int nonzero_col = 0;
    for (int c = 0; c < 3; ++c) {
      if (std::abs(rows[r][c]) > 1) throw Error(ErrorKind::InvalidArgument, "rotation entries must be -1, 0 or 1");
      nonzero_row += rows[r][c] != 0;
      nonzero_col += rows[c][r] != 0;
    }
    if (nonzero_row != 1 || nonzero_col != 1) {
      throw Error(ErrorKind::InvalidArgument, "rotation must be a signed permutation matrix");
    }
  }
  if (determinant(rows) != 1) throw Error(ErrorKind::InvalidArgument, "rotation must have determinant +1");
}

Vec3 AxisRotation::apply(const Vec3& v) const {
  Vec3 out;
  for (int r = 0; r < 3; ++r) out[r] = rows[r][0] * v.x() + rows[r][1] * v.y() + rows[r][2] * v.z();
  return out;
}

Vec3 AxisRotation::extents(const Vec3& local) const {
  Vec3 out;
  for (int r = 0; r < 3; ++r) {
    out[r] = std::abs(rows[r][0]) * local.x() + std::abs(rows[r][1]) * local.y() +
             std::abs(rows[r][2]) * local.z();
  }
  return out;
}

Eigen::Vector4d AxisRotation::quaternion() const {
  // Shepperd's method on an exact integer matrix.
  const auto m = [this](int r, int c) { return static_cast<double>(rows[r][c]); };
  const double trace = m(0, 0) + m(1, 1) + m(2, 2);
  double w, x, y, z;
  if (trace > 0.0) {
    const double s = 2.0 * std::sqrt(trace + 1.0);
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    w = (m(2, 1) - m(1, 2)) / s;
    x = 0.25 * s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    y = 0.25 * s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
    z = 0.25 * s;
  }
  Eigen::Vector4d q(w, x, y, z);
  if (q[0] < 0.0) q = -q;
  return q.normalized();
}

const std::vector<AxisRotation>& AxisRotation::all() {
  static const std::vector<AxisRotation> rotations = [] {
    std::vector<AxisRotation> out;
    std::array<int, 3> perm{0, 1, 2};
    do {
      for (int signs = 0; signs < 8; ++signs) {
        AxisRotation r;
        for (int row = 0; row < 3; ++row) {
          r.rows[row] = {0, 0, 0};
          r.rows[row][perm[row]] = (signs >> row) & 1 ? -1 : 1;
        }
        if (determinant(r.rows) == 1) out.push_back(r);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }();
  return rotations;
}

double AxisBox::volume() const {
  const Vec3 e = (hi - lo).cwiseMax(0.0);
  return e.x() * e.y() * e.z();
}

void BoxBody::validate() const {
  if (id.empty() || id == kFloorId || id.rfind("wall", 0) == 0) {
    throw Error(ErrorKind::InvalidScene, "invalid body id '" + id + "'");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorKind::InvalidScene, "body " + id + ": mass must be positive");
  }
  if (!half_extents.allFinite() || (half_extents.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidScene, "body " + id + ": half extents must be positive");
  }
  if (!position.allFinite()) throw Error(ErrorKind::InvalidScene, "body " + id + ": position not finite");
  try {
    rotation.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidScene, "body " + id + ": " + e.what());
  }
}

AxisBox BoxBody::bounds() const {
  const Vec3 e = world_half_extents();
  return {position - e, position + e};
}

const BoxBody& StackScene::body(const std::string& id) const {
  for (const auto& b : bodies) {
    if (b.id == id) return b;
  }
  throw Error(ErrorKind::UnknownBody, "no body with id '" + id + "'");
}

std::vector<std::string> StackScene::supported_by(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& b : bodies) {
    if (b.support == id) out.push_back(b.id);
  }
  return out;
}

void StackScene::validate() const {
  if (!(gravity > 0.0) || !std::isfinite(gravity)) throw Error(ErrorKind::InvalidScene, "gravity must be positive");
  if (!(basket.half_x > 0.0 && basket.half_y > 0.0 && basket.height > 0.0)) {
    throw Error(ErrorKind::InvalidScene, "basket extents must be positive");
  }
  std::map<std::string, const BoxBody*> by_id;
  for (const auto& b : bodies) {
    b.validate();
    if (!by_id.emplace(b.id, &b).second) throw Error(ErrorKind::InvalidScene, "duplicate body id '" + b.id + "'");
  }
  const AxisBox interior{{-basket.half_x, -basket.half_y, 0.0}, {basket.half_x, basket.half_y, 0.0}};
  for (const auto& b : bodies) {
    // Walk the support chain; more steps than bodies means a cycle.
    const BoxBody* cursor = &b;
    for (std::size_t steps = 0; cursor->support != kFloorId; ++steps) {
      if (steps > bodies.size()) throw Error(ErrorKind::InvalidScene, "support cycle through '" + b.id + "'");
      auto it = by_id.find(cursor->support);
      if (it == by_id.end()) {
        throw Error(ErrorKind::InvalidScene,
                    "body " + cursor->id + " is supported by unknown body '" + cursor->support + "'");
      }
      cursor = it->second;
    }
    const AxisBox box = b.bounds();
    if (!footprint_contains(interior, box)) {
      throw Error(ErrorKind::InvalidScene, "body " + b.id + " is outside the basket");
    }
    if (b.support == kFloorId) {
      if (std::abs(box.lo.z()) > kContactTol) {
        throw Error(ErrorKind::InvalidScene, "body " + b.id + " is not resting on the floor");
      }
    } else {
      const BoxBody& s = *by_id.at(b.support);
      const AxisBox sbox = s.bounds();
      if (std::abs(box.lo.z() - sbox.hi.z()) > kContactTol) {
        throw Error(ErrorKind::InvalidScene, "body " + b.id + " is not resting on " + s.id);
      }
      if (!footprint_contains(sbox, box)) {
        throw Error(ErrorKind::InvalidScene,
                    "body " + b.id + " footprint is not contained in the top face of " + s.id);
      }
    }
  }
  for (std::size_t a = 0; a < bodies.size(); ++a) {
    for (std::size_t c = a + 1; c < bodies.size(); ++c) {
      const AxisBox p = bodies[a].bounds();
      const AxisBox q = bodies[c].bounds();
      const double ox = overlap_1d(p.lo.x(), p.hi.x(), q.lo.x(), q.hi.x());
      const double oy = overlap_1d(p.lo.y(), p.hi.y(), q.lo.y(), q.hi.y());
      const double oz = overlap_1d(p.lo.z(), p.hi.z(), q.lo.z(), q.hi.z());
      if (ox > kContactTol && oy > kContactTol && oz > kContactTol) {
        throw Error(ErrorKind::InvalidScene,
                    "bodies " + bodies[a].id + " and " + bodies[c].id + " interpenetrate");
      }
    }
  }
}

std::vector<BoxTemplate> default_catalog() {
  // Full dimensions in meters halved; masses in kg.
  return {
      {"cracker_box", {0.080, 0.0355, 0.105}, 0.411},
      {"sugar_box", {0.0445, 0.019, 0.0875}, 0.514},
      {"pudding_box", {0.0445, 0.0175, 0.055}, 0.187},
      {"gelatin_box", {0.0365, 0.014, 0.0425}, 0.097},
      {"potted_meat_can", {0.0505, 0.0255, 0.042}, 0.370},
      {"wood_block", {0.0425, 0.0425, 0.100}, 0.729},
      {"foam_brick", {0.025, 0.0375, 0.025}, 0.028},
  };
}

StackScene generate_scene(std::uint64_t seed, int body_count,
                          const std::vector<BoxTemplate>& catalog,
                          const GenerationOptions& options, Diagnostics* diagnostics) {
  if (catalog.empty()) throw Error(ErrorKind::InvalidArgument, "box catalog is empty");
  if (body_count < 0) throw Error(ErrorKind::InvalidArgument, "body_count must be >= 0");
  StackScene scene;
  scene.basket = options.basket;
  scene.gravity = options.gravity;
  const Basket& basket = options.basket;
  SceneRng rng(seed);
  const auto& rotations = AxisRotation::all();

  for (int n = 0; n < body_count; ++n) {
    const BoxTemplate& tmpl = catalog[rng.index(catalog.size())];
    bool placed = false;
    for (int attempt = 0; attempt < options.max_retries && !placed; ++attempt) {
      BoxBody body;
      body.id = tmpl.name + "_" + std::to_string(n);
      body.half_extents = tmpl.half_extents;
      body.mass = tmpl.mass;
      body.rotation = rotations[rng.index(rotations.size())];
      const Vec3 e = body.world_half_extents();
      if (e.x() > basket.half_x || e.y() > basket.half_y) continue;

      double x = 0.0;
      double y = 0.0;
      if (!scene.bodies.empty() && rng.chance(options.stack_probability)) {
        const BoxBody& target = scene.bodies[rng.index(scene.bodies.size())];
        const Vec3 te = target.world_half_extents();
        if (e.x() > te.x() || e.y() > te.y()) continue;
        x = rng.uniform(target.position.x() - (te.x() - e.x()), target.position.x() + (te.x() - e.x()));
        y = rng.uniform(target.position.y() - (te.y() - e.y()), target.position.y() + (te.y() - e.y()));
      } else {
        x = rng.uniform(-basket.half_x + e.x(), basket.half_x - e.x());
        y = rng.uniform(-basket.half_y + e.y(), basket.half_y - e.y());
        if (rng.chance(options.wall_snap_probability)) {
          x = rng.chance(0.5) ? -basket.half_x + e.x() : basket.half_x - e.x();
        }
        if (rng.chance(options.wall_snap_probability)) {
          y = rng.chance(0.5) ? -basket.half_y + e.y() : basket.half_y - e.y();
        }
      }

      // Lower the box until it touches the floor or the highest top face
      // under its footprint.
      const AxisBox foot{{x - e.x(), y - e.y(), 0.0}, {x + e.x(), y + e.y(), 0.0}};
      double landing = 0.0;
      for (const auto& other : scene.bodies) {
        const AxisBox ob = other.bounds();
        if (overlap_1d(foot.lo.x(), foot.hi.x(), ob.lo.x(), ob.hi.x()) > kContactTol &&
            overlap_1d(foot.lo.y(), foot.hi.y(), ob.lo.y(), ob.hi.y()) > kContactTol) {
          landing = std::max(landing, ob.hi.z());
        }
      }
      std::string support = kFloorId;
      bool supported = true;
      if (landing > 0.0) {
        std::vector<const BoxBody*> touching;
        for (const auto& other : scene.bodies) {
          const AxisBox ob = other.bounds();
          if (std::abs(ob.hi.z() - landing) <= kContactTol &&
              overlap_1d(foot.lo.x(), foot.hi.x(), ob.lo.x(), ob.hi.x()) > kContactTol &&
              overlap_1d(foot.lo.y(), foot.hi.y(), ob.lo.y(), ob.hi.y()) > kContactTol) {
            touching.push_back(&other);
          }
        }
        supported = touching.size() == 1 && footprint_contains(touching.front()->bounds(), foot);
        if (supported) support = touching.front()->id;
      }
      if (!supported || landing + 2.0 * e.z() > basket.height) continue;

      body.position = Vec3(x, y, landing + e.z());
      body.support = support;
      scene.bodies.push_back(std::move(body));
      placed = true;
    }
    if (!placed) {
      note(diagnostics, "seed " + std::to_string(seed) + ": could not place body " +
                            std::to_string(n) + " (" + tmpl.name + ") after " +
                            std::to_string(options.max_retries) + " attempts");
    }
  }
  return scene;
}

std::vector<double> interface_loads(const StackScene& scene) {
  scene.validate();
  std::map<std::string, std::size_t> index;
  for (std::size_t n = 0; n < scene.bodies.size(); ++n) index[scene.bodies[n].id] = n;
  std::vector<double> carried(scene.bodies.size(), -1.0);
  // Mass carried through a body's support interface: its own plus everything
  // stacked on it.
  std::function<double(std::size_t)> carried_mass = [&](std::size_t n) -> double {
    if (carried[n] >= 0.0) return carried[n];
    double total = scene.bodies[n].mass;
    for (const auto& child : scene.supported_by(scene.bodies[n].id)) total += carried_mass(index.at(child));
    carried[n] = total;
    return total;
  };
  std::vector<double> loads(scene.bodies.size());
  for (std::size_t n = 0; n < scene.bodies.size(); ++n) loads[n] = scene.gravity * carried_mass(n);
  return loads;
}

ContactFrame solve_static_contacts(const StackScene& scene, std::int64_t frame) {
  const std::vector<double> loads = interface_loads(scene);
  ContactFrame out{frame, {}};
  auto add = [&](const std::string& a, const std::string& b, const Vec3& p, double force, const Vec3& normal) {
    out.contacts.push_back({p, force, normal, frame, a, b});
  };
  for (std::size_t n = 0; n < scene.bodies.size(); ++n) {
    const BoxBody& body = scene.bodies[n];
    const AxisBox box = body.bounds();
    const double z = box.lo.z();
    const double quarter = loads[n] / 4.0;
    for (double x : {box.lo.x(), box.hi.x()}) {
      for (double y : {box.lo.y(), box.hi.y()}) add(body.support, body.id, {x, y, z}, quarter, Vec3::UnitZ());
    }
  }

  // Flush wall contacts: geometric only, no preload.
  const Basket& basket = scene.basket;
  for (const auto& body : scene.bodies) {
    const AxisBox box = body.bounds();
    const double z_hi = std::min(box.hi.z(), basket.height);
    struct Wall {
      const char* id;
      int axis;
      double plane;
      double side;  // +1 when the wall normal points along +axis
    };
    const Wall walls[] = {{"wall_x-", 0, -basket.half_x, 1.0},
                          {"wall_x+", 0, basket.half_x, -1.0},
                          {"wall_y-", 1, -basket.half_y, 1.0},
                          {"wall_y+", 1, basket.half_y, -1.0}};
    for (const auto& wall : walls) {
      const double face = wall.side > 0.0 ? box.lo[wall.axis] : box.hi[wall.axis];
      if (std::abs(face - wall.plane) > kContactTol) continue;
      const int other = 1 - wall.axis;
      Vec3 normal = Vec3::Zero();
      normal[wall.axis] = wall.side;
      for (double t : {box.lo[other], box.hi[other]}) {
        for (double z : {box.lo.z(), z_hi}) {
          Vec3 p;
          p[wall.axis] = wall.plane;
          p[other] = t;
          p.z() = z;
          add(wall.id, body.id, p, 0.0, normal);
        }
      }
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string scene_to_json(const StackScene& scene) {
  nlohmann::ordered_json doc;
  doc["basket"] = {{"half_x", scene.basket.half_x},
                   {"half_y", scene.basket.half_y},
                   {"height", scene.basket.height}};
  doc["gravity"] = scene.gravity;
  doc["bodies"] = nlohmann::ordered_json::array();
  for (const auto& b : scene.bodies) {
    nlohmann::ordered_json jb;
    jb["id"] = b.id;
    jb["half_extents"] = vec_json(b.half_extents);
    jb["position"] = vec_json(b.position);
    jb["rotation"] = b.rotation.rows;
    jb["mass"] = b.mass;
    jb["support"] = b.support;
    doc["bodies"].push_back(std::move(jb));
  }
  return doc.dump(2) + "\n";
}

StackScene scene_from_json(const std::string& text) {
  StackScene scene;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& basket = doc.at("basket");
    scene.basket.half_x = basket.at("half_x").get<double>();
    scene.basket.half_y = basket.at("half_y").get<double>();
    scene.basket.height = basket.at("height").get<double>();
    scene.gravity = doc.value("gravity", 9.81);
    for (const auto& jb : doc.at("bodies")) {
      BoxBody b;
      b.id = jb.at("id").get<std::string>();
      b.half_extents = vec_from(jb.at("half_extents"));
      b.position = vec_from(jb.at("position"));
      if (jb.contains("rotation")) b.rotation.rows = jb.at("rotation").get<std::array<std::array<int, 3>, 3>>();
      b.mass = jb.at("mass").get<double>();
      b.support = jb.value("support", std::string(kFloorId));
      scene.bodies.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("scene JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::Parse, std::string("scene JSON: ") + e.what());
  }
  scene.validate();
  return scene;
}

void write_scene_file(const StackScene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << scene_to_json(scene);
}

StackScene read_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scene_from_json(buffer.str());
}

}  // namespace forcemap
