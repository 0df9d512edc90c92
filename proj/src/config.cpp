#include "forcemap/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace forcemap {
namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, path + ": " + what);
}

// Reads the object at `path`, rejecting keys outside `allowed`.
const Json& object_at(const Json& parent, const std::string& key, const std::string& path,
                      const std::set<std::string>& allowed) {
  const Json& obj = parent.at(key);
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown key");
  }
  return obj;
}

template <class T>
void read(const Json& obj, const std::string& key, const std::string& path, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

void read_vec(const Json& obj, const std::string& key, const std::string& path, Vec3& out) {
  if (!obj.contains(key)) return;
  std::array<double, 3> v{};
  read(obj, key, path, v);
  out = Vec3(v[0], v[1], v[2]);
}

void positive(double value, const std::string& path) {
  if (!(value > 0.0) || !std::isfinite(value)) fail(path, "must be positive");
}

}  // namespace

GridSpec PipelineConfig::default_grid() {
  GridSpec spec;
  const double half = 0.5 * (kDefaultDim - 1) * kDefaultSpacing;
  spec.origin = Vec3(-half, -half, -0.02);
  return spec;
}

void PipelineConfig::validate() const {
  try {
    grid.validate();
  } catch (const Error& e) {
    fail("grid", e.what());
  }
  positive(kde.sigma, "kde.sigma");
  positive(kde.truncation_sigmas, "kde.truncation_sigmas");
  if (temporal_window < 1) fail("temporal_window", "must be >= 1");
  positive(query.radius, "planner.radius");
  if (!(query.leaky_slope > 0.0 && query.leaky_slope < 1.0)) fail("planner.leaky_slope", "must lie in (0, 1)");
  if (n_candidates < kMinCandidates) fail("planner.n_candidates", "must be >= 16");
  if (min_bodies < 1 || max_bodies < min_bodies) fail("generation.body_count", "need 1 <= min <= max");
  positive(generation.basket.half_x, "generation.basket.half_x");
  positive(generation.basket.half_y, "generation.basket.half_y");
  positive(generation.basket.height, "generation.basket.height");
  positive(generation.gravity, "generation.gravity");
  if (generation.max_retries < 1) fail("generation.max_retries", "must be >= 1");
  for (auto [p, name] : {std::pair{generation.stack_probability, "generation.stack_probability"},
                         std::pair{generation.wall_snap_probability, "generation.wall_snap_probability"}}) {
    if (!(p >= 0.0 && p <= 1.0)) fail(name, "must lie in [0, 1]");
  }
  positive(travel, "travel");
  if (!(ply_threshold >= 0.0 && ply_threshold <= 1.0)) fail("ply_threshold", "must lie in [0, 1]");
}

PipelineConfig config_from_json(const std::string& text) {
  PipelineConfig config;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  const Json root = Json{{"config", doc}};
  const Json& top = object_at(root, "config", "config",
                              {"grid", "kde", "temporal_window", "planner", "generation", "seed",
                               "travel", "ply_threshold"});
  if (top.contains("grid")) {
    const Json& g = object_at(top, "grid", "grid", {"dims", "origin", "spacing"});
    read(g, "dims", "grid", config.grid.dims);
    read_vec(g, "origin", "grid", config.grid.origin);
    read(g, "spacing", "grid", config.grid.spacing);
  }
  if (top.contains("kde")) {
    const Json& k = object_at(top, "kde", "kde",
                              {"sigma", "truncation_sigmas", "influence_margin", "normalization"});
    read(k, "sigma", "kde", config.kde.sigma);
    read(k, "truncation_sigmas", "kde", config.kde.truncation_sigmas);
    read(k, "influence_margin", "kde", config.kde.influence_margin);
    std::string norm = "as-printed";
    read(k, "normalization", "kde", norm);
    if (norm == "as-printed") {
      config.kde.normalization = KdeNormalization::AsPrinted;
    } else if (norm == "textbook") {
      config.kde.normalization = KdeNormalization::Textbook;
    } else {
      fail("kde.normalization", "must be 'as-printed' or 'textbook'");
    }
  }
  read(top, "temporal_window", "config", config.temporal_window);
  if (top.contains("planner")) {
    const Json& p = object_at(top, "planner", "planner",
                              {"radius", "leaky_slope", "sign_convention", "n_candidates"});
    read(p, "radius", "planner", config.query.radius);
    read(p, "leaky_slope", "planner", config.query.leaky_slope);
    read(p, "n_candidates", "planner", config.n_candidates);
    if (p.contains("sign_convention")) {
      std::string sign;
      read(p, "sign_convention", "planner", sign);
      try {
        config.query.sign = parse_sign_convention(sign);
      } catch (const Error& e) {
        fail("planner.sign_convention", e.what());
      }
    }
  }
  if (top.contains("generation")) {
    const Json& g = object_at(top, "generation", "generation",
                              {"min_bodies", "max_bodies", "basket", "gravity", "max_retries",
                               "stack_probability", "wall_snap_probability"});
    read(g, "min_bodies", "generation", config.min_bodies);
    read(g, "max_bodies", "generation", config.max_bodies);
    read(g, "gravity", "generation", config.generation.gravity);
    read(g, "max_retries", "generation", config.generation.max_retries);
    read(g, "stack_probability", "generation", config.generation.stack_probability);
    read(g, "wall_snap_probability", "generation", config.generation.wall_snap_probability);
    if (g.contains("basket")) {
      const Json& b = object_at(g, "basket", "generation.basket", {"half_x", "half_y", "height"});
      read(b, "half_x", "generation.basket", config.generation.basket.half_x);
      read(b, "half_y", "generation.basket", config.generation.basket.half_y);
      read(b, "height", "generation.basket", config.generation.basket.height);
    }
  }
  read(top, "seed", "config", config.seed);
  read(top, "travel", "config", config.travel);
  read(top, "ply_threshold", "config", config.ply_threshold);
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json doc;
  doc["grid"] = {{"dims", c.grid.dims},
                 {"origin", {c.grid.origin.x(), c.grid.origin.y(), c.grid.origin.z()}},
                 {"spacing", c.grid.spacing}};
  doc["kde"] = {{"sigma", c.kde.sigma},
                {"truncation_sigmas", c.kde.truncation_sigmas},
                {"influence_margin", c.kde.influence_margin},
                {"normalization", c.kde.normalization == KdeNormalization::AsPrinted ? "as-printed" : "textbook"}};
  doc["temporal_window"] = c.temporal_window;
  doc["planner"] = {{"radius", c.query.radius},
                    {"leaky_slope", c.query.leaky_slope},
                    {"sign_convention", sign_convention_name(c.query.sign)},
                    {"n_candidates", c.n_candidates}};
  doc["generation"] = {{"min_bodies", c.min_bodies},
                       {"max_bodies", c.max_bodies},
                       {"basket", {{"half_x", c.generation.basket.half_x},
                                   {"half_y", c.generation.basket.half_y},
                                   {"height", c.generation.basket.height}}},
                       {"gravity", c.generation.gravity},
                       {"max_retries", c.generation.max_retries},
                       {"stack_probability", c.generation.stack_probability},
                       {"wall_snap_probability", c.generation.wall_snap_probability}};
  doc["seed"] = c.seed;
  doc["travel"] = c.travel;
  doc["ply_threshold"] = c.ply_threshold;
  return doc.dump(2) + "\n";
}

}  // namespace forcemap
