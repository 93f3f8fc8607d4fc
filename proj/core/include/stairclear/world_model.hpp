#pragma once

#include "stairclear/geometry.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace stairclear {

/// Lateral push direction relative to a staircase's step axis.
enum class PushDirection { Left, Right };

std::string_view to_string(PushDirection d);

/// Straight push path for one object: OBB centers sampled every `step_size`
/// along the step axis, ending at the boundary of the traversable area.
struct MotionPrimitive {
  int object_id = -1;
  PushDirection direction = PushDirection::Right;
  /// Unit push direction in the world frame (horizontal).
  Vec3 axis = Vec3::UnitX();
  /// Center of the OBB face farthest from the motion direction.
  Vec3 contact_point = Vec3::Zero();
  /// path.front() is the object's current center.
  std::vector<Vec3> path;
  double step_size = 0.02;

  const Vec3& expected_end() const { return path.back(); }
  /// Arc length of the path (straight, so start-to-end distance).
  double length() const;
};

/// Step reference of the surface an object rests on. staircase < 0 means the ground.
struct SupportRef {
  int staircase = -1;
  int step = 0;

  bool on_ground() const { return staircase < 0; }
  bool operator==(const SupportRef&) const = default;
};

/// Parametric straight staircase. Stair frame: s along step_axis (lateral,
/// "right"), d along the ascent direction, z up, origin at the front-left
/// corner of the first step at ground level.
struct Staircase {
  int id = 0;
  int num_steps = 1;
  double tread_depth = 0.30;
  double riser_height = 0.17;
  double width = 1.2;
  Vec3 origin = Vec3::Zero();
  double yaw = 0.0;
  bool wall_left = false;
  bool wall_right = false;

  static constexpr double kWallThickness = 0.05;
  static constexpr double kWallClearance = 0.5;

  Vec2 step_axis() const { return {std::cos(yaw), std::sin(yaw)}; }
  Vec2 ascent_axis() const { return {-std::sin(yaw), std::cos(yaw)}; }

  Vec3 to_world(const Vec3& stair) const { return origin + rotate_yaw(stair, yaw); }
  Vec3 to_stair(const Vec3& world) const { return rotate_yaw(Vec3(world - origin), -yaw); }

  /// Height of tread `step` (1-based) in the world frame.
  double tread_height(int step) const { return origin.z() + step * riser_height; }
  OrientedRect tread(int step) const;
  /// Solid block under tread `step`, from ground level to the tread.
  Obb column(int step) const;
  /// All solid volumes: step columns plus any configured side walls.
  std::vector<Obb> solids() const;
  OrientedRect footprint() const;
  double top_height() const { return tread_height(num_steps); }

  /// Throws std::invalid_argument naming the violated field.
  void validate() const;
};

struct GroundPlane {
  double height = 0.0;
  Vec2 min = {-3.0, -3.0};
  Vec2 max = {3.0, 3.0};

  OrientedRect rect() const;
  void validate() const;
};

/// A horizontal walkable rectangle: one stair tread or the ground extent.
struct Surface {
  OrientedRect rect;
  double height = 0.0;
  SupportRef ref;
};

enum class MovabilityTag { PotentiallyMovable, Static };

std::string_view to_string(MovabilityTag t);

struct Movability {
  MovabilityTag tag = MovabilityTag::PotentiallyMovable;
  std::vector<MotionPrimitive> primitives;
};

struct TrackedObject {
  int id = -1;
  std::vector<Vec3> cloud;
  Obb obb;
  Movability movability;
  SupportRef support;
  double last_update_time = 0.0;
  /// Set when a post-interaction association failed and the pose is a prediction.
  bool low_confidence = false;

  bool is_static() const { return movability.tag == MovabilityTag::Static; }
  const MotionPrimitive* primitive(PushDirection d) const;
};

/// Default size gate, full extents (m).
inline const Vec3 kDefaultSizeLimits{0.60, 0.60, 0.50};
/// Allowed distance of stored cloud points outside their OBB.
inline constexpr double kCloudMargin = 0.03;

/// Static iff any full extent of `obb` exceeds the matching limit. Ties are movable.
MovabilityTag classify_by_size(const Obb& obb, const Vec3& limits);

/// Low-dimensional environment model shared by perception, planning and the
/// executor. Single writer; copies are cheap snapshots.
class WorldModel {
 public:
  WorldModel(std::vector<Staircase> staircases, GroundPlane ground,
             Vec3 size_limits = kDefaultSizeLimits);

  const std::vector<Staircase>& staircases() const { return staircases_; }
  const GroundPlane& ground() const { return ground_; }
  const std::vector<TrackedObject>& objects() const { return objects_; }
  const Vec3& size_limits() const { return size_limits_; }
  int next_id() const { return next_id_; }

  const Staircase& staircase(int id) const;
  /// Staircase whose footprint contains `xy`, else the nearest one.
  const Staircase& staircase_near(const Vec2& xy) const;

  /// Adds an object. Its movability is set by the size gate; primitives start empty.
  int insert_object(std::vector<Vec3> cloud, const Obb& obb, SupportRef support = {},
                    double time = 0.0);

  const TrackedObject* find(int id) const;
  const TrackedObject& get(int id) const;
  bool contains(int id) const { return find(id) != nullptr; }

  /// PotentiallyMovable -> Static only. Static clears primitives; repeat is a no-op.
  void set_movability(int id, MovabilityTag tag);
  /// Replaces primitives of a movable object; ignored for static objects.
  void set_primitives(int id, std::vector<MotionPrimitive> primitives);
  void update_geometry(int id, std::vector<Vec3> cloud, const Obb& obb, SupportRef support,
                       double time);
  void set_low_confidence(int id, bool flag);
  bool erase(int id);

  /// One rectangle per tread of every staircase, then the ground extent.
  std::vector<Surface> navigable_surfaces() const;

 private:
  TrackedObject& get_mut(int id);
  void check_stair_aligned(const Obb& obb) const;

  std::vector<Staircase> staircases_;
  GroundPlane ground_;
  Vec3 size_limits_;
  std::vector<TrackedObject> objects_;
  int next_id_ = 0;
};

/// Height of the highest navigable surface under `xy` at or below `z + tol`.
std::optional<Surface> surface_below(const std::vector<Surface>& surfaces, const Vec2& xy,
                                     double z, double tol);

}  // namespace stairclear
