#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace stairclear {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Rotates the xy components of `p` by `yaw` about the vertical axis.
inline Vec3 rotate_yaw(const Vec3& p, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

inline Vec2 rotate_yaw(const Vec2& p, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Oriented bounding box restricted to rotation about the vertical axis.
struct Obb {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  double yaw = 0.0;

  Vec3 full_extents() const { return 2.0 * half_extents; }
  double volume() const { return 8.0 * half_extents.prod(); }
  double bottom() const { return center.z() - half_extents.z(); }
  double top() const { return center.z() + half_extents.z(); }

  /// World point expressed in the box frame (origin at center).
  Vec3 to_local(const Vec3& p) const { return rotate_yaw(Vec3(p - center), -yaw); }
  Vec3 to_world(const Vec3& local) const { return center + rotate_yaw(local, yaw); }

  bool contains(const Vec3& p, double margin = 0.0) const;
  Obb inflated(double margin) const;
  Obb translated(const Vec3& delta) const;

  /// Bottom-face corners, counter-clockwise in the box frame.
  std::array<Vec3, 4> bottom_corners() const;
  /// Footprint corners in the xy plane, counter-clockwise.
  std::array<Vec2, 4> footprint() const;
};

/// Signed penetration depth between two yaw-only boxes: the smallest overlap
/// over all separating axes (2D SAT in xy plus the vertical interval).
/// Negative when the boxes are separated, zero when faces touch.
double penetration_depth(const Obb& a, const Obb& b);

/// Horizontal rectangle with a yaw, used for tread and ground footprints.
struct OrientedRect {
  Vec2 center = Vec2::Zero();
  Vec2 half_size = Vec2::Zero();
  double yaw = 0.0;

  /// Closed containment test with an absolute tolerance.
  bool contains(const Vec2& p, double tol = 1e-9) const;
  /// Euclidean distance from `p` to the rectangle (0 inside).
  double distance(const Vec2& p) const;
  double area() const { return 4.0 * half_size.x() * half_size.y(); }
};

/// Uniform hash grid over a fixed point set for radius and nearest queries.
class SpatialHash {
 public:
  SpatialHash(std::span<const Vec3> points, double cell_size);

  /// Indices of all points within `radius` of `p` (inclusive), ascending.
  void radius_neighbors(const Vec3& p, double radius, std::vector<std::size_t>& out) const;
  /// Index of the nearest point within `max_radius`, ties broken by lower index.
  std::optional<std::size_t> nearest(const Vec3& p, double max_radius) const;

  std::size_t size() const { return points_.size(); }

 private:
  using Key = std::int64_t;
  Key key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;
  std::array<std::int64_t, 3> cell_of(const Vec3& p) const;

  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<Key, std::vector<std::size_t>> cells_;
};

/// Keeps the first point that falls in each voxel of size `voxel`, preserving
/// input order. A cloud with at most one point per voxel is a fixed point.
std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double voxel);

Vec3 centroid(std::span<const Vec3> points);

}  // namespace stairclear
