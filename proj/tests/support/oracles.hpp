#pragma once

// Slow, independent reference implementations used to check the library.

#include "stairclear/contact.hpp"
#include "stairclear/planning.hpp"
#include "stairclear/world_model.hpp"

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using stairclear::Obb;
using stairclear::Vec3;

/// Plain Dijkstra over the 26-neighbourhood. Infinity when unreachable.
double dijkstra_cost(const stairclear::VoxelGrid& grid, const stairclear::Voxel& start,
                     const stairclear::Voxel& goal);

/// d/dt(dL/dqd) - dL/dq from scalar link kinematics and central differences.
Vec3 lagrangian_torques(const stairclear::LegModel& model, const Vec3& q, const Vec3& qd,
                        const Vec3& qdd);
/// dV/dq by central differences of the potential energy.
Vec3 potential_gradient(const stairclear::LegModel& model, const Vec3& q);
double total_energy(const stairclear::LegModel& model, const Vec3& q, const Vec3& qd);

/// Hit-or-miss intersection and union volumes over the pair's bounding region.
double monte_carlo_iou(const Obb& a, const Obb& b, std::size_t samples, std::mt19937_64& rng);

/// O(n^2) DBSCAN. labels[i] is the cluster of point i or -1 for noise;
/// core[i] marks core points.
struct DbscanTruth {
  std::vector<int> labels;
  std::vector<bool> core;
  int clusters = 0;
};
DbscanTruth brute_dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts);
/// True iff `clusters` is a valid DBSCAN result for `truth`: core points grouped
/// identically (up to relabeling), noise excluded, and every border point
/// placed in a cluster holding one of its core neighbours.
bool dbscan_agrees(std::span<const Vec3> points, double eps, const DbscanTruth& truth,
                   const std::vector<std::vector<std::size_t>>& clusters);

/// Collision test written against stair-frame intervals. Boxes must share the
/// staircase yaw.
bool collision_free(const Obb& box, const stairclear::WorldModel& world, int ignore_id,
                    double tol);
/// All four bottom corners over a tread or the ground at the right height.
bool supported(const Obb& box, const stairclear::WorldModel& world, double height_tol);

/// Largest offset along `axis`, on a `resolution` lattice, such that every
/// lattice pose from 0 up to it passes both checks. -1 if the start fails.
double sweep_limit(const Obb& start, const Vec3& axis, const stairclear::WorldModel& world,
                   int ignore_id, double resolution, double max_travel);

}  // namespace oracle
