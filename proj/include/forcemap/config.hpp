#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "forcemap/grid.hpp"
#include "forcemap/labelgen.hpp"
#include "forcemap/liftmetrics.hpp"
#include "forcemap/planner.hpp"
#include "forcemap/staticscene.hpp"

namespace forcemap {

/// Everything a pipeline run depends on. Defaults: 5.75 mm grid,
/// sigma = 12 mm, R = 5 cm, slope 0.1.
struct PipelineConfig {
  GridSpec grid = default_grid();
  KdeParams kde;
  int temporal_window = kDefaultTemporalWindow;
  LiftQuery query;  // center is supplied per plan
  std::size_t n_candidates = kDefaultCandidates;
  GenerationOptions generation;
  int min_bodies = 4;
  int max_bodies = 6;
  std::uint64_t seed = 0;
  double travel = kDefaultTravel;
  double ply_threshold = 0.01;

  /// 64^3 cube at 5.75 mm, centered over the basket, floor 2 cm above the
  /// lowest voxel layer.
  static GridSpec default_grid();

  /// Throws Error(Config) naming the offending field.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are rejected with the dotted
/// path of the field. Missing keys keep their defaults.
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

}  // namespace forcemap
