#include "forcemap/pipeline.hpp"

#include <algorithm>
#include <random>

namespace forcemap {
namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ProxySummaryRow summarize_rows(std::string label, const std::vector<LiftComparison>& records) {
  ProxySummaryRow row;
  row.label = std::move(label);
  row.count = records.size();
  std::vector<double> planned, up, ratios;
  for (const auto& r : records) {
    planned.push_back(r.proxy_planned);
    up.push_back(r.proxy_straight_up);
    if (r.proxy_straight_up > 0.0) ratios.push_back(r.proxy_planned / r.proxy_straight_up);
    if (r.proxy_planned > r.proxy_straight_up) ++row.planned_worse;
    row.mean_planned += r.proxy_planned;
    row.mean_straight_up += r.proxy_straight_up;
  }
  if (!records.empty()) {
    row.mean_planned /= static_cast<double>(records.size());
    row.mean_straight_up /= static_cast<double>(records.size());
  }
  row.median_planned = median(planned);
  row.median_straight_up = median(up);
  row.median_ratio = median(ratios);
  return row;
}

}  // namespace

int body_count_for_seed(std::uint64_t seed, const PipelineConfig& config) {
  // A separate stream from the scene's own generator.
  std::mt19937_64 engine(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto span = static_cast<std::uint64_t>(config.max_bodies - config.min_bodies + 1);
  return config.min_bodies + static_cast<int>(engine() % span);
}

StackScene generate_for_seed(std::uint64_t seed, const PipelineConfig& config, Diagnostics* diagnostics) {
  return generate_scene(seed, body_count_for_seed(seed, config), default_catalog(), config.generation,
                        diagnostics);
}

ForceMap scene_force_map(const StackScene& scene, const PipelineConfig& config, Diagnostics* diagnostics) {
  return kde_voxelize(solve_static_contacts(scene), config.grid, config.kde, diagnostics);
}

std::vector<std::string> overlapped_targets(const StackScene& scene) {
  std::vector<std::string> out;
  for (const auto& b : scene.bodies) {
    if (!scene.supported_by(b.id).empty()) out.push_back(b.id);
  }
  return out;
}

LiftComparison compare_plan(const StackScene& scene, const std::string& target, const LiftQuery& query,
                            const LiftPlan& plan, const PipelineConfig& config) {
  LiftComparison out;
  out.target = target;
  out.query = query;
  out.plan = plan;
  out.proxy_planned = sweep_disturbance_proxy(scene, target, plan.direction, config.travel);
  out.proxy_straight_up = sweep_disturbance_proxy(scene, target, Vec3::UnitZ(), config.travel);
  return out;
}

LiftComparison compare_lift(const StackScene& scene, const ForceMap& map, const std::string& target,
                            const PipelineConfig& config) {
  LiftQuery query = config.query;
  query.center = scene.body(target).position;
  PlanOptions options;
  options.n_candidates = config.n_candidates;
  return compare_plan(scene, target, query, plan_lift(map, query, options), config);
}

std::vector<ProxySummaryRow> summarize_proxy(const std::vector<LiftComparison>& records,
                                             double threshold_deg) {
  std::vector<std::pair<LiftPlan, LiftComparison>> tagged;
  for (const auto& r : records) tagged.emplace_back(r.plan, r);
  auto strata = stratify_by_angle(std::move(tagged), threshold_deg);
  std::vector<LiftComparison> shallow;
  for (auto& entry : strata.within) shallow.push_back(std::move(entry.second));
  return {summarize_rows("all", records),
          summarize_rows("angle<=" + std::to_string(static_cast<int>(threshold_deg)) + "deg", shallow)};
}

}  // namespace forcemap
