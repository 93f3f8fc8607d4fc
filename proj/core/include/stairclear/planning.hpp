#pragma once

#include "stairclear/world_model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace stairclear {

using Voxel = std::array<int, 3>;

/// Axis-aligned world box.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  void expand(const Vec3& p);
  void expand(const Obb& box);
};

/// Dense occupancy over world-axis-aligned cubic voxels. Voxel (i, j, k)
/// covers origin + res * [i, i+1) x [j, j+1) x [k, k+1).
class VoxelGrid {
 public:
  VoxelGrid(Vec3 origin, double resolution, std::array<int, 3> dims);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return occ_.size(); }

  bool in_bounds(const Voxel& v) const;
  std::size_t linear(const Voxel& v) const;
  Voxel from_linear(std::size_t idx) const;
  bool occupied(const Voxel& v) const { return occ_[linear(v)] != 0; }
  void set(const Voxel& v, bool occupied) { occ_[linear(v)] = occupied ? 1 : 0; }
  std::size_t count_occupied() const;

  Vec3 center(const Voxel& v) const;
  /// Voxel containing `p`, if inside the grid.
  std::optional<Voxel> locate(const Vec3& p) const;
  /// Marks every voxel whose interior overlaps `box`.
  void fill(const Obb& box);

 private:
  Vec3 origin_;
  double resolution_;
  std::array<int, 3> dims_;
  std::vector<std::uint8_t> occ_;
};

/// Grid over `bounds` (snapped outward to the global voxel lattice) marking
/// stair solids, the ground slab and object OBBs, all inflated by `inflate`.
/// Objects whose id is in `ignore_ids` are left out.
VoxelGrid voxelize(const WorldModel& world, double resolution, double inflate,
                   const Aabb& bounds, const std::vector<int>& ignore_ids = {});
/// Same, over the ground extent up to one metre above the highest tread.
VoxelGrid voxelize(const WorldModel& world, double resolution, double inflate);

class PlanningError : public std::runtime_error {
 public:
  enum class Kind { NoPath, InvalidEndpoint };
  PlanningError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct GridPath {
  std::vector<Voxel> voxels;
  double cost = 0.0;
};

/// Cost of a 26-connected move sequence with n1 face, n2 edge and n3 corner steps.
double move_cost(std::int64_t n1, std::int64_t n2, std::int64_t n3, double resolution);

/// 26-connected A* with Euclidean step costs and a straight-line heuristic.
/// Equal f values resolve by the lower linear voxel index.
GridPath astar(const VoxelGrid& grid, const Voxel& start, const Voxel& goal);

enum class Phase { Approach, Push, Return };

const char* to_string(Phase p);

struct FootTrajectory {
  std::vector<Vec3> waypoints;
  std::vector<Phase> phases;

  std::size_t size() const { return waypoints.size(); }
  void append(const Vec3& p, Phase ph) {
    waypoints.push_back(p);
    phases.push_back(ph);
  }
};

struct PlanningParams {
  double resolution = 0.025;
  /// Foot radius.
  double inflate = 0.04;
  /// Margin around the task's points when sizing the local grid.
  double margin = 0.25;
  /// Longest retreat searched along each retraction direction.
  double max_retract = 0.6;
};

/// Approach (target object is an obstacle) to the nearest free voxel behind
/// the contact point, then the push along the contact path with the target
/// removed from the grid.
FootTrajectory plan_foot_trajectory(const Vec3& foot_pos, const MotionPrimitive& primitive,
                                    const WorldModel& world, const PlanningParams& params = {});

/// Return to `rest_pos` with every object as an obstacle. When `retract_dir`
/// is given and the foot starts inside an inflated obstacle, it first backs
/// off along that direction to the nearest free voxel, or failing that
/// straight up.
FootTrajectory plan_return(const Vec3& foot_pos, const Vec3& rest_pos, const WorldModel& world,
                           const PlanningParams& params = {},
                           std::optional<Vec3> retract_dir = std::nullopt);

}  // namespace stairclear
