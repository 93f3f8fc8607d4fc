#pragma once

#include "stairclear/world_model.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace stairclear {

/// Camera pose: position plus heading about the vertical axis.
struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

/// Registered point cloud in the world frame.
struct PointCloud {
  std::vector<Vec3> points;
  Pose sensor_pose;
};

struct Cluster {
  std::vector<Vec3> points;
  Obb obb;
  SupportRef support;
};

struct PerceptionParams {
  double surface_eps = 0.02;
  double dbscan_eps = 0.06;
  std::size_t dbscan_min_pts = 8;
  /// Degenerate boxes are inflated to at least this half extent.
  double min_half_extent = 0.01;
  /// Clusters whose bottom lies within this height above a surface are
  /// extended down to rest on it.
  double support_snap = 0.06;
};

/// Points that lie on no tread, ground or riser surface (within `eps`), in input order.
std::vector<Vec3> subtract_surfaces(std::span<const Vec3> points, const WorldModel& world,
                                    double eps = 0.02);

/// Density-based clustering. Returns index sets (ascending), ordered by their
/// smallest member; noise points are dropped.
std::vector<std::vector<std::size_t>> dbscan(std::span<const Vec3> points, double eps,
                                             std::size_t min_pts);

/// Minimal box with the given yaw containing every point.
Obb fit_stair_aligned_obb(std::span<const Vec3> points, double yaw);

/// Fits a stair-aligned box (yaw of the staircase nearest the centroid),
/// enforces the minimum half extent and extends the bottom down to the
/// supporting surface when it floats within `support_snap` above it.
Cluster fit_resting_cluster(std::vector<Vec3> points, const WorldModel& world,
                            const PerceptionParams& params = {});

/// Pulls the faces of a box resting on a stair tread back onto the tread when
/// they overshoot it by at most `snap`: a bottom below the tread surface, or
/// sides past its edges. Noise on the outermost points otherwise reads as
/// riser penetration or overhang. Boxes on the ground are left alone.
void snap_to_tread(Obb& box, const WorldModel& world, double snap);

/// Surface subtraction, clustering and stair-aligned OBB fitting.
std::vector<Cluster> perceive(const PointCloud& cloud, const WorldModel& world,
                              const PerceptionParams& params = {});

/// Whitespace separated "x y z" lines.
void write_xyz(std::ostream& os, std::span<const Vec3> points);
std::vector<Vec3> read_xyz(std::istream& is);

}  // namespace stairclear
