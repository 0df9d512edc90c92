#pragma once

#include <string>
#include <vector>

#include "forcemap/config.hpp"
#include "forcemap/liftmetrics.hpp"
#include "forcemap/planner.hpp"
#include "forcemap/staticscene.hpp"

namespace forcemap {

/// Body count for a generated scene: uniform in [min_bodies, max_bodies],
/// derived from the seed alone.
int body_count_for_seed(std::uint64_t seed, const PipelineConfig& config);

StackScene generate_for_seed(std::uint64_t seed, const PipelineConfig& config,
                             Diagnostics* diagnostics = nullptr);

/// Ground-truth force map of a static scene (solver contacts through KDE).
ForceMap scene_force_map(const StackScene& scene, const PipelineConfig& config,
                         Diagnostics* diagnostics = nullptr);

/// Bodies that carry at least one other body.
std::vector<std::string> overlapped_targets(const StackScene& scene);

struct LiftComparison {
  std::string scene;
  std::string target;
  LiftQuery query;
  LiftPlan plan;
  double proxy_planned = 0.0;
  double proxy_straight_up = 0.0;
};

/// Plans a lift for `target` from `map` and compares the sweep proxy of the
/// planned direction against lifting straight up.
LiftComparison compare_lift(const StackScene& scene, const ForceMap& map, const std::string& target,
                            const PipelineConfig& config);

/// Same comparison for an already computed plan.
LiftComparison compare_plan(const StackScene& scene, const std::string& target, const LiftQuery& query,
                            const LiftPlan& plan, const PipelineConfig& config);

struct ProxySummaryRow {
  std::string label;
  std::size_t count = 0;
  double mean_planned = 0.0;
  double mean_straight_up = 0.0;
  double median_planned = 0.0;
  double median_straight_up = 0.0;
  // median over records of planned / straight-up, records with a zero
  // straight-up proxy excluded
  double median_ratio = 0.0;
  std::size_t planned_worse = 0;
};

/// Two rows: every record, and the records whose planned direction makes
/// at most `threshold_deg` with the bottom surface.
std::vector<ProxySummaryRow> summarize_proxy(const std::vector<LiftComparison>& records,
                                             double threshold_deg = 30.0);

}  // namespace forcemap
