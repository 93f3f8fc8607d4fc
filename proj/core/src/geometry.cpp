#include "stairclear/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace stairclear {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

bool Obb::contains(const Vec3& p, double margin) const {
  const Vec3 l = to_local(p);
  return std::abs(l.x()) <= half_extents.x() + margin &&
         std::abs(l.y()) <= half_extents.y() + margin &&
         std::abs(l.z()) <= half_extents.z() + margin;
}

Obb Obb::inflated(double margin) const {
  Obb out = *this;
  out.half_extents.array() += margin;
  return out;
}

Obb Obb::translated(const Vec3& delta) const {
  Obb out = *this;
  out.center += delta;
  return out;
}

std::array<Vec3, 4> Obb::bottom_corners() const {
  const double hx = half_extents.x(), hy = half_extents.y(), hz = half_extents.z();
  return {to_world({-hx, -hy, -hz}), to_world({hx, -hy, -hz}), to_world({hx, hy, -hz}),
          to_world({-hx, hy, -hz})};
}

std::array<Vec2, 4> Obb::footprint() const {
  const auto c = bottom_corners();
  return {c[0].head<2>(), c[1].head<2>(), c[2].head<2>(), c[3].head<2>()};
}

double penetration_depth(const Obb& a, const Obb& b) {
  const Vec2 d = (b.center - a.center).head<2>();
  const Vec2 ax[2] = {rotate_yaw(Vec2{1, 0}, a.yaw), rotate_yaw(Vec2{0, 1}, a.yaw)};
  const Vec2 bx[2] = {rotate_yaw(Vec2{1, 0}, b.yaw), rotate_yaw(Vec2{0, 1}, b.yaw)};

  auto radius = [](const Vec2 axes[2], const Vec3& half, const Vec2& n) {
    return std::abs(half.x() * axes[0].dot(n)) + std::abs(half.y() * axes[1].dot(n));
  };

  double depth = a.half_extents.z() + b.half_extents.z() - std::abs(b.center.z() - a.center.z());
  for (const Vec2* axes : {ax, bx}) {
    for (int i = 0; i < 2; ++i) {
      const Vec2& n = axes[i];
      const double overlap =
          radius(ax, a.half_extents, n) + radius(bx, b.half_extents, n) - std::abs(d.dot(n));
      depth = std::min(depth, overlap);
    }
  }
  return depth;
}

bool OrientedRect::contains(const Vec2& p, double tol) const {
  const Vec2 l = rotate_yaw(Vec2(p - center), -yaw);
  return std::abs(l.x()) <= half_size.x() + tol && std::abs(l.y()) <= half_size.y() + tol;
}

double OrientedRect::distance(const Vec2& p) const {
  const Vec2 l = rotate_yaw(Vec2(p - center), -yaw);
  const double dx = std::max(0.0, std::abs(l.x()) - half_size.x());
  const double dy = std::max(0.0, std::abs(l.y()) - half_size.y());
  return std::hypot(dx, dy);
}

SpatialHash::SpatialHash(std::span<const Vec3> points, double cell_size)
    : points_(points), cell_(cell_size) {
  cells_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    cells_[key(c[0], c[1], c[2])].push_back(i);
  }
}

SpatialHash::Key SpatialHash::key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
  constexpr std::int64_t kBias = 1 << 20;
  constexpr std::int64_t kMask = (1 << 21) - 1;
  return ((ix + kBias) & kMask) << 42 | ((iy + kBias) & kMask) << 21 | ((iz + kBias) & kMask);
}

std::array<std::int64_t, 3> SpatialHash::cell_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

void SpatialHash::radius_neighbors(const Vec3& p, double radius,
                                   std::vector<std::size_t>& out) const {
  out.clear();
  const auto lo = cell_of(p - Vec3::Constant(radius));
  const auto hi = cell_of(p + Vec3::Constant(radius));
  const double r2 = radius * radius;
  for (auto ix = lo[0]; ix <= hi[0]; ++ix)
    for (auto iy = lo[1]; iy <= hi[1]; ++iy)
      for (auto iz = lo[2]; iz <= hi[2]; ++iz) {
        const auto it = cells_.find(key(ix, iy, iz));
        if (it == cells_.end()) continue;
        for (std::size_t i : it->second)
          if ((points_[i] - p).squaredNorm() <= r2) out.push_back(i);
      }
  std::sort(out.begin(), out.end());
}

std::optional<std::size_t> SpatialHash::nearest(const Vec3& p, double max_radius) const {
  const auto c = cell_of(p);
  const auto max_ring = static_cast<std::int64_t>(std::ceil(max_radius / cell_)) + 1;
  std::optional<std::size_t> best;
  double best_d2 = max_radius * max_radius;
  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    // Any point in a ring beyond `ring` is at least (ring - 1) * cell away.
    if (best && (ring - 1) * cell_ > std::sqrt(best_d2)) break;
    for (auto ix = c[0] - ring; ix <= c[0] + ring; ++ix)
      for (auto iy = c[1] - ring; iy <= c[1] + ring; ++iy) {
        // Inside the square only the top and bottom caps belong to the shell.
        const bool edge = std::max(std::abs(ix - c[0]), std::abs(iy - c[1])) == ring;
        const std::int64_t dz = edge || ring == 0 ? 1 : 2 * ring;
        for (auto iz = c[2] - ring; iz <= c[2] + ring; iz += dz) {
          const auto it = cells_.find(key(ix, iy, iz));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) {
            const double d2 = (points_[i] - p).squaredNorm();
            if (d2 > best_d2) continue;
            if (!best || d2 < best_d2 || i < *best) {
              best_d2 = d2;
              best = i;
            }
          }
        }
      }
  }
  return best;
}

std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double voxel) {
  std::vector<Vec3> out;
  std::unordered_set<std::int64_t> seen;
  seen.reserve(points.size());
  constexpr std::int64_t kBias = 1 << 20;
  constexpr std::int64_t kMask = (1 << 21) - 1;
  for (const Vec3& p : points) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() / voxel));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() / voxel));
    const auto iz = static_cast<std::int64_t>(std::floor(p.z() / voxel));
    const std::int64_t k =
        ((ix + kBias) & kMask) << 42 | ((iy + kBias) & kMask) << 21 | ((iz + kBias) & kMask);
    if (seen.insert(k).second) out.push_back(p);
  }
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

}  // namespace stairclear
