#pragma once

#include "stairclear/perception.hpp"
#include "stairclear/primitives.hpp"
#include "stairclear/world_model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace stairclear {

/// Exact intersection over union of two boxes sharing the same yaw.
/// Throws std::invalid_argument if the yaws differ by more than 1e-6 rad.
double obb_iou(const Obb& a, const Obb& b);

struct AssociationTarget {
  int id = -1;
  Obb obb;
};

struct Association {
  struct Match {
    std::size_t cluster = 0;
    int id = -1;
    double iou = 0.0;
  };
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_clusters;
  std::vector<int> unmatched_targets;
};

/// Greedy best-first matching by descending IoU. Ties resolve by lower
/// cluster index, then target order.
Association associate(std::span<const Cluster> clusters, std::span<const AssociationTarget> targets,
                      double iou_min = 0.25);

struct IcpParams {
  int max_iter = 60;
  /// Stop when the mean correspondence distance improves by less than this (m).
  double tol = 1e-6;
  /// Correspondences farther than this are ignored.
  double max_correspondence = 0.10;
  /// Final radius of the coarse-to-fine schedule.
  double min_correspondence = 0.02;
  double voxel = 0.01;
};

struct IcpResult {
  std::vector<Vec3> merged;
  Obb obb;
  /// Transform applied to `incoming`: p' = R(yaw) p + translation.
  Vec3 translation = Vec3::Zero();
  double yaw = 0.0;
  int iterations = 0;
  double mean_distance = 0.0;
  /// Share of `existing` points with a transformed incoming point within two voxels.
  double fitness = 0.0;
  bool aligned = false;
};

/// Point-to-point ICP (translation + yaw) aligning `incoming` onto `existing`,
/// then a voxel-downsampled union and an OBB refit with `obb_yaw`.
/// `initial_translation` pre-shifts `incoming`. With fewer than 3 incoming
/// points the clouds are unioned without alignment.
IcpResult icp_merge(std::span<const Vec3> existing, std::span<const Vec3> incoming,
                    double obb_yaw, const IcpParams& params = {},
                    const Vec3& initial_translation = Vec3::Zero());

/// Proprioceptive object pose estimate while the foot pushes it.
struct PredictionState {
  int object_id = -1;
  bool active = false;
  Obb start_obb;
  Obb predicted_obb;
  MotionPrimitive primitive;
  double displacement = 0.0;
};

PredictionState begin_interaction(const WorldModel& world, int object_id,
                                  const MotionPrimitive& primitive);

/// Arc length along `path` of the point closest to `p`.
double project_onto_polyline(std::span<const Vec3> path, const Vec3& p);

/// Projects the foot onto the primitive's contact path and advances the
/// predicted OBB by that arc length. Displacement never decreases.
PredictionState update_prediction(const PredictionState& state, const Vec3& foot_pos);

struct TrackingParams {
  double iou_min = 0.25;
  /// An unmatched cluster with at least this share of its points inside a
  /// known object's box (plus the cloud margin) is merged into that object.
  double containment_min = 0.9;
  /// Noise allowance when settling stored boxes onto their tread; below the
  /// cloud margin so stored clouds stay inside their boxes.
  double tread_snap = 0.025;
  IcpParams icp;
  PrimitiveParams primitives;
  PerceptionParams perception;
};

enum class FinalizeStatus { Matched, Lost };

struct FinalizeOutcome {
  FinalizeStatus status = FinalizeStatus::Lost;
  Obb target;
  std::optional<Obb> corrected;
  double iou = 0.0;
  /// Ids created from clusters that matched nothing.
  std::vector<int> new_ids;
};

/// Post-push visual correction: `target` (the predicted OBB, or the last-known
/// OBB when no prediction ran) is associated with fresh clusters. On a match
/// the object's cloud is merged and its primitives regenerated; otherwise the
/// object keeps `target` and is flagged low-confidence.
FinalizeOutcome finalize_interaction(WorldModel& world, int object_id, const Obb& target,
                                     std::span<const Cluster> clusters, double time,
                                     const TrackingParams& params = {});

struct ScanUpdate {
  std::vector<Association::Match> matches;
  /// Objects that absorbed an unmatched partial-view cluster.
  std::vector<int> absorbed;
  std::vector<int> new_ids;
};

/// Ordinary perception cycle: clusters are associated with every object's
/// last-known OBB (or an override), matched objects are merged, unmatched
/// clusters lying inside a known object are merged into it, the rest become
/// new objects. Primitives of movable objects are regenerated.
ScanUpdate update_world_from_scan(WorldModel& world, std::span<const Cluster> clusters,
                                  double time, const TrackingParams& params = {},
                                  std::span<const AssociationTarget> overrides = {});

}  // namespace stairclear
