#include "stairclear/perception.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stairclear {

namespace {

bool on_riser(const Staircase& s, const Vec3& p, double eps) {
  const Vec3 l = s.to_stair(p);
  if (l.x() < -eps || l.x() > s.width + eps) return false;
  const double z = l.z();
  for (int k = 1; k <= s.num_steps; ++k) {
    if (std::abs(l.y() - (k - 1) * s.tread_depth) > eps) continue;
    if (z >= (k - 1) * s.riser_height - eps && z <= k * s.riser_height + eps) return true;
  }
  return false;
}

}  // namespace

std::vector<Vec3> subtract_surfaces(std::span<const Vec3> points, const WorldModel& world,
                                    double eps) {
  if (!(eps > 0)) throw std::invalid_argument("subtract_surfaces: eps must be > 0");
  const auto surfaces = world.navigable_surfaces();
  std::vector<Vec3> out;
  out.reserve(points.size() / 4);
  for (const Vec3& p : points) {
    bool surface = false;
    for (const auto& s : surfaces) {
      if (std::abs(p.z() - s.height) <= eps && s.rect.contains(p.head<2>(), eps)) {
        surface = true;
        break;
      }
    }
    if (!surface) {
      for (const auto& st : world.staircases())
        if (on_riser(st, p, eps)) {
          surface = true;
          break;
        }
    }
    if (!surface) out.push_back(p);
  }
  return out;
}

std::vector<std::vector<std::size_t>> dbscan(std::span<const Vec3> points, double eps,
                                             std::size_t min_pts) {
  if (!(eps > 0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  const SpatialHash index(points, eps);
  std::vector<int> label(points.size(), kUnvisited);
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> neighbors, inner;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    index.radius_neighbors(points[i], eps, neighbors);
    if (neighbors.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    label[i] = id;
    std::vector<std::size_t> frontier(neighbors.begin(), neighbors.end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t j = frontier[f];
      if (label[j] == kNoise) label[j] = id;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = id;
      index.radius_neighbors(points[j], eps, inner);
      if (inner.size() >= min_pts) frontier.insert(frontier.end(), inner.begin(), inner.end());
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    if (label[i] >= 0) clusters[label[i]].push_back(i);
  return clusters;
}

Obb fit_stair_aligned_obb(std::span<const Vec3> points, double yaw) {
  if (points.empty()) throw std::invalid_argument("fit_stair_aligned_obb: no points");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : points) {
    const Vec3 l = rotate_yaw(p, -yaw);
    lo = lo.cwiseMin(l);
    hi = hi.cwiseMax(l);
  }
  Obb box;
  box.center = rotate_yaw(Vec3(0.5 * (lo + hi)), yaw);
  box.half_extents = 0.5 * (hi - lo);
  box.yaw = yaw;
  return box;
}

Cluster fit_resting_cluster(std::vector<Vec3> points, const WorldModel& world,
                            const PerceptionParams& params) {
  Cluster c;
  c.points = std::move(points);
  const Vec3 mean = centroid(c.points);
  const Staircase& stair = world.staircase_near(mean.head<2>());
  c.obb = fit_stair_aligned_obb(c.points, stair.yaw);
  c.obb.half_extents = c.obb.half_extents.cwiseMax(params.min_half_extent);

  // Objects rest on a surface; points near it were removed with the surface.
  const double bottom = c.obb.bottom();
  const auto surfaces = world.navigable_surfaces();
  if (auto s = surface_below(surfaces, c.obb.center.head<2>(), bottom, params.surface_eps)) {
    c.support = s->ref;
    const double gap = bottom - s->height;
    if (gap > 0 && gap <= params.support_snap) {
      const double top = c.obb.top();
      c.obb.center.z() = 0.5 * (top + s->height);
      c.obb.half_extents.z() = 0.5 * (top - s->height);
    }
  }
  return c;
}

void snap_to_tread(Obb& box, const WorldModel& world, double snap) {
  const auto surfaces = world.navigable_surfaces();
  const auto s = surface_below(surfaces, box.center.head<2>(), box.bottom(), snap);
  if (!s || s->ref.on_ground() || s->rect.yaw != box.yaw) return;
  const double gap = box.bottom() - s->height;
  if (gap < 0 && gap >= -snap) {
    const double top = box.top();
    box.center.z() = 0.5 * (top + s->height);
    box.half_extents.z() = 0.5 * (top - s->height);
  }
  const OrientedRect& rect = s->rect;
  Vec2 local = rotate_yaw(Vec2(box.center.head<2>() - rect.center), -rect.yaw);
  Vec2 half = box.half_extents.head<2>();
  for (int i = 0; i < 2; ++i) {
    double lo = local[i] - half[i], hi = local[i] + half[i];
    const double edge = rect.half_size[i];
    if (lo < -edge && lo >= -edge - snap) lo = -edge;
    if (hi > edge && hi <= edge + snap) hi = edge;
    if (hi - lo <= 0) continue;
    local[i] = 0.5 * (lo + hi);
    half[i] = 0.5 * (hi - lo);
  }
  box.center.head<2>() = rect.center + rotate_yaw(local, rect.yaw);
  box.half_extents.head<2>() = half;
}

std::vector<Cluster> perceive(const PointCloud& cloud, const WorldModel& world,
                              const PerceptionParams& params) {
  std::vector<Cluster> out;
  if (world.staircases().empty()) throw std::logic_error("perceive: world has no staircase");
  const auto objects = subtract_surfaces(cloud.points, world, params.surface_eps);
  const auto groups = dbscan(objects, params.dbscan_eps, params.dbscan_min_pts);

  for (const auto& group : groups) {
    std::vector<Vec3> pts;
    pts.reserve(group.size());
    for (std::size_t i : group) pts.push_back(objects[i]);
    out.push_back(fit_resting_cluster(std::move(pts), world, params));
  }
  return out;
}

void write_xyz(std::ostream& os, std::span<const Vec3> points) {
  const auto old = os.precision(9);
  for (const Vec3& p : points) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  os.precision(old);
}

std::vector<Vec3> read_xyz(std::istream& is) {
  std::vector<Vec3> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw std::runtime_error("read_xyz: malformed line: " + line);
    out.emplace_back(x, y, z);
  }
  return out;
}

}  // namespace stairclear
