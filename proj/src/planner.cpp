#include "forcemap/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace forcemap {

std::string sign_convention_name(SignConvention convention) {
  return convention == SignConvention::AsPrinted ? "as-printed" : "prose-consistent";
}

SignConvention parse_sign_convention(const std::string& name) {
  if (name == "as-printed") return SignConvention::AsPrinted;
  if (name == "prose-consistent") return SignConvention::ProseConsistent;
  throw Error(ErrorKind::InvalidArgument,
              "sign convention must be 'as-printed' or 'prose-consistent', got '" + name + "'");
}

void LiftQuery::validate() const {
  if (!center.allFinite()) throw Error(ErrorKind::InvalidArgument, "lift center must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidArgument, "lift radius must be positive");
  }
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "leaky slope must lie in (0, 1)");
  }
}

GradientField restrict_outward(const GradientField& grad, const Vec3& center) {
  GradientField out = grad;
  const GridSpec& spec = grad.spec();
  auto& vectors = out.vectors();
  for (std::size_t n = 0; n < vectors.size(); ++n) {
    const auto [i, j, k] = spec.unlinear(n);
    if (vectors[n].dot(spec.center(i, j, k) - center) < 0.0) vectors[n].setZero();
  }
  return out;
}

SphereSamples::SphereSamples(const GradientField& restricted, const LiftQuery& query)
    : slope_(query.leaky_slope), volume_(restricted.spec().voxel_volume()) {
  const GridSpec& spec = restricted.spec();
  const double sign = query.sign == SignConvention::AsPrinted ? -1.0 : 1.0;
  const double r_sq = query.radius * query.radius;
  const auto& vectors = restricted.vectors();
  for (std::size_t n = 0; n < vectors.size(); ++n) {
    if (vectors[n].isZero(0.0)) continue;
    const auto [i, j, k] = spec.unlinear(n);
    if ((spec.center(i, j, k) - query.center).squaredNorm() <= r_sq) {
      gradients_.push_back(sign * vectors[n]);
    }
  }
}

double SphereSamples::cost(const Vec3& d) const {
  double sum = 0.0;
  for (const Vec3& g : gradients_) {
    const double t = g.dot(d);
    sum += t >= 0.0 ? t : slope_ * t;
  }
  return sum * volume_;
}

double SphereSamples::scale() const {
  double sum = 0.0;
  for (const Vec3& g : gradients_) sum += g.norm();
  return sum * volume_;
}

double lift_cost(const GradientField& restricted, const LiftQuery& query, const Vec3& direction) {
  return SphereSamples(restricted, query).cost(direction);
}

std::vector<Vec3> fibonacci_directions(std::size_t count) {
  std::vector<Vec3> out;
  out.reserve(count);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double turns = static_cast<double>(i) / golden;
    turns -= std::floor(turns);
    const double phi = 2.0 * std::numbers::pi * turns;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

double lattice_spacing(std::size_t count) {
  return std::sqrt(4.0 * std::numbers::pi / static_cast<double>(count));
}

namespace {

// Point at tangent offset (u, v) from `base`, mapped onto the sphere along
// the great circle.
Vec3 cap_point(const Vec3& base, const Vec3& e1, const Vec3& e2, double u, double v) {
  const double rho = std::hypot(u, v);
  if (rho == 0.0) return base;
  const Vec3 w = (u * e1 + v * e2) / rho;
  return (std::cos(rho) * base + std::sin(rho) * w).normalized();
}

struct CapSearch {
  const SphereSamples& samples;
  Vec3 base;
  Vec3 e1;
  Vec3 e2;
  double cap;

  double cost_at(double u, double v) const { return samples.cost(cap_point(base, e1, e2, u, v)); }
};

// Golden-section line searches through the current best point along eight
// tangent directions, shrinking the search window when a sweep stalls.
// Returns the best tangent offset found; never worse than the start.
std::pair<Vec3, double> refine_in_cap(const SphereSamples& samples, const Vec3& start,
                                      double start_cost, double cap) {
  Vec3 helper = std::abs(start.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = start.cross(helper).normalized();
  const Vec3 e2 = start.cross(e1);
  const CapSearch search{samples, start, e1, e2, cap};

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double bu = 0.0, bv = 0.0, best = start_cost;
  double window = cap;
  // Eight line directions, 22.5 degrees apart in the tangent plane.
  std::array<std::array<double, 2>, 8> axes{};
  for (std::size_t n = 0; n < axes.size(); ++n) {
    const double angle = std::numbers::pi * static_cast<double>(n) / static_cast<double>(axes.size());
    axes[n] = {std::cos(angle), std::sin(angle)};
  }
  for (int sweep = 0; sweep < 200 && window > 1e-9; ++sweep) {
    bool improved = false;
    for (const auto& axis : axes) {
      // Clip [-window, window] so the line stays inside the cap disk.
      const double pu = bu, pv = bv, au = axis[0], av = axis[1];
      const double b = pu * au + pv * av;
      const double disc = b * b - (pu * pu + pv * pv - cap * cap);
      if (disc < 0.0) continue;
      double lo = std::max(-window, -b - std::sqrt(disc));
      double hi = std::min(window, -b + std::sqrt(disc));
      if (!(hi > lo)) continue;
      auto f = [&](double t) { return search.cost_at(pu + t * au, pv + t * av); };
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = f(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = f(x2);
        }
      }
      const double t = f1 <= f2 ? x1 : x2;
      const double value = std::min(f1, f2);
      if (value < best) {
        best = value;
        bu = pu + t * au;
        bv = pv + t * av;
        improved = true;
      }
    }
    if (!improved) window *= 0.5;
  }
  return {cap_point(start, e1, e2, bu, bv), best};
}

}  // namespace

LiftPlan plan_lift(const ForceMap& map, const LiftQuery& query, const PlanOptions& options) {
  if (options.n_candidates < kMinCandidates) {
    throw Error(ErrorKind::InvalidArgument, "plan_lift needs at least " +
                                                std::to_string(kMinCandidates) + " candidates");
  }
  const auto lattice = fibonacci_directions(options.n_candidates);
  return plan_lift(map, query, lattice, options);
}

LiftPlan plan_lift(const ForceMap& map, const LiftQuery& query, std::span<const Vec3> candidates,
                   const PlanOptions& options) {
  query.validate();
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate directions");
  const GridSpec& spec = map.spec();
  const Vec3 nearest = query.center.cwiseMax(spec.origin).cwiseMin(spec.upper_center());
  if ((nearest - query.center).norm() > query.radius) {
    throw Error(ErrorKind::OutsideGrid, "lift sphere does not intersect the force-map grid");
  }

  const SphereSamples samples(restrict_outward(gradient(map), query.center), query);

  // Straight up is always evaluated so the plan never loses to the
  // vertical baseline; it sits after the lattice in index order.
  std::vector<Vec3> directions(candidates.begin(), candidates.end());
  directions.push_back(Vec3::UnitZ());
  std::vector<double> costs(directions.size());
  for (std::size_t n = 0; n < directions.size(); ++n) costs[n] = samples.cost(directions[n]);

  LiftPlan plan;
  if (options.keep_candidates) {
    for (std::size_t n = 0; n < candidates.size(); ++n) plan.candidates.push_back({directions[n], costs[n]});
  }
  if (std::all_of(costs.begin(), costs.end(), [](double c) { return c == 0.0; })) {
    plan.direction = Vec3::UnitZ();
    plan.cost = 0.0;
    plan.degenerate = true;
    plan.lattice_index = candidates.size();
    return plan;
  }

  std::size_t best = 0;
  for (std::size_t n = 1; n < directions.size(); ++n) {
    if (costs[n] < costs[best] ||
        (costs[n] == costs[best] && directions[n].z() > directions[best].z())) {
      best = n;
    }
  }
  plan.lattice_index = best;
  plan.direction = directions[best];
  plan.cost = costs[best];

  if (options.refine) {
    const double cap = lattice_spacing(candidates.size());
    auto [refined, refined_cost] = refine_in_cap(samples, directions[best], costs[best], cap);
    if (refined_cost < plan.cost) {
      plan.direction = refined;
      plan.cost = refined_cost;
    }
  }
  return plan;
}

std::string plan_to_json(const LiftQuery& query, const LiftPlan& plan) {
  nlohmann::ordered_json doc;
  doc["center"] = {query.center.x(), query.center.y(), query.center.z()};
  doc["radius"] = query.radius;
  doc["leaky_slope"] = query.leaky_slope;
  doc["sign_convention"] = sign_convention_name(query.sign);
  doc["direction"] = {plan.direction.x(), plan.direction.y(), plan.direction.z()};
  doc["cost"] = plan.cost;
  doc["degenerate"] = plan.degenerate;
  if (!plan.candidates.empty()) {
    auto& table = doc["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : plan.candidates) {
      table.push_back({{"direction", {c.direction.x(), c.direction.y(), c.direction.z()}},
                       {"cost", c.cost}});
    }
  }
  return doc.dump(2) + "\n";
}

PlanRecord plan_from_json(const std::string& text) {
  PlanRecord record;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto c = doc.at("center").get<std::array<double, 3>>();
    const auto d = doc.at("direction").get<std::array<double, 3>>();
    record.query.center = Vec3(c[0], c[1], c[2]);
    record.query.radius = doc.at("radius").get<double>();
    record.query.leaky_slope = doc.at("leaky_slope").get<double>();
    record.query.sign = parse_sign_convention(doc.at("sign_convention").get<std::string>());
    record.plan.direction = Vec3(d[0], d[1], d[2]);
    record.plan.cost = doc.at("cost").get<double>();
    record.plan.degenerate = doc.at("degenerate").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("plan JSON: ") + e.what());
  }
  record.query.validate();
  if (std::abs(record.plan.direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::Parse, "plan JSON: direction is not a unit vector");
  }
  return record;
}

}  // namespace forcemap
