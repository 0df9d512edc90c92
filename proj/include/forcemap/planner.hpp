#pragma once

#include <span>
#include <string>
#include <vector>

#include "forcemap/grid.hpp"

namespace forcemap {

/// Sign applied to the restricted gradient inside the LeakyReLU.
///  ProseConsistent: LeakyReLU(+grad . d), moving against the contact force
///                   on the target is penalized (default).
///  AsPrinted:       LeakyReLU(-grad . d).
enum class SignConvention { ProseConsistent, AsPrinted };

std::string sign_convention_name(SignConvention convention);
SignConvention parse_sign_convention(const std::string& name);

struct LiftQuery {
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
  double leaky_slope = 0.1;
  SignConvention sign = SignConvention::ProseConsistent;

  void validate() const;
};

struct CandidateCost {
  Vec3 direction;
  double cost;
};

struct LiftPlan {
  Vec3 direction = Vec3::UnitZ();
  double cost = 0.0;
  bool degenerate = false;
  // Lattice direction the refinement started from.
  std::size_t lattice_index = 0;
  std::vector<CandidateCost> candidates;  // filled when requested
};

inline constexpr std::size_t kDefaultCandidates = 1024;
inline constexpr std::size_t kMinCandidates = 16;

struct PlanOptions {
  std::size_t n_candidates = kDefaultCandidates;
  bool refine = true;
  bool keep_candidates = false;
};

/// Keeps the gradient where it has a component pointing away from `center`
/// (grad . (x - c) >= 0) and zeroes it elsewhere.
GradientField restrict_outward(const GradientField& grad, const Vec3& center);

/// Sum over voxel centers within `radius` of the center of
/// LeakyReLU(s * grad . d) * h^3.
double lift_cost(const GradientField& restricted, const LiftQuery& query, const Vec3& direction);

/// Spherical Fibonacci lattice of `count` unit directions.
std::vector<Vec3> fibonacci_directions(std::size_t count);

/// Approximate angular spacing of a `count`-point uniform lattice, radians.
double lattice_spacing(std::size_t count);

/// Lift direction minimizing lift_cost over the unit sphere.
LiftPlan plan_lift(const ForceMap& map, const LiftQuery& query, const PlanOptions& options = {});

/// Same search on a caller-supplied candidate set (used to check symmetry
/// with a rotated lattice).
LiftPlan plan_lift(const ForceMap& map, const LiftQuery& query, std::span<const Vec3> candidates,
                   const PlanOptions& options = {});

/// Restricted gradients of the voxels inside the query sphere, with the
/// voxel volume. The cost of every direction is a function of these alone.
class SphereSamples {
 public:
  SphereSamples(const GradientField& restricted, const LiftQuery& query);

  double cost(const Vec3& direction) const;
  /// Sum of |g| h^3 over the samples: an upper bound on |cost|.
  double scale() const;
  bool empty() const { return gradients_.empty(); }
  std::size_t size() const { return gradients_.size(); }

 private:
  std::vector<Vec3> gradients_;  // already multiplied by the sign
  double slope_;
  double volume_;
};

std::string plan_to_json(const LiftQuery& query, const LiftPlan& plan);

struct PlanRecord {
  LiftQuery query;
  LiftPlan plan;
};

/// Parses a plan report written by plan_to_json.
PlanRecord plan_from_json(const std::string& text);

}  // namespace forcemap
