#include "stairclear/planning.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <limits>
#include <queue>
#include <string>

namespace stairclear {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;

std::string voxel_str(const Voxel& v) {
  return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]) + ")";
}

}  // namespace

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void Aabb::expand(const Obb& box) {
  for (const Vec2& c : box.footprint()) {
    expand(Vec3(c.x(), c.y(), box.bottom()));
    expand(Vec3(c.x(), c.y(), box.top()));
  }
}

VoxelGrid::VoxelGrid(Vec3 origin, double resolution, std::array<int, 3> dims)
    : origin_(std::move(origin)), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0)) throw std::invalid_argument("VoxelGrid: resolution must be > 0");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("VoxelGrid: dims must be > 0");
  occ_.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
}

bool VoxelGrid::in_bounds(const Voxel& v) const {
  for (int a = 0; a < 3; ++a)
    if (v[a] < 0 || v[a] >= dims_[a]) return false;
  return true;
}

std::size_t VoxelGrid::linear(const Voxel& v) const {
  return (static_cast<std::size_t>(v[0]) * dims_[1] + v[1]) * dims_[2] + v[2];
}

Voxel VoxelGrid::from_linear(std::size_t idx) const {
  const int z = static_cast<int>(idx % dims_[2]);
  idx /= dims_[2];
  const int y = static_cast<int>(idx % dims_[1]);
  return {static_cast<int>(idx / dims_[1]), y, z};
}

std::size_t VoxelGrid::count_occupied() const {
  return static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), 1));
}

Vec3 VoxelGrid::center(const Voxel& v) const {
  return origin_ + resolution_ * Vec3(v[0] + 0.5, v[1] + 0.5, v[2] + 0.5);
}

std::optional<Voxel> VoxelGrid::locate(const Vec3& p) const {
  Voxel v;
  for (int a = 0; a < 3; ++a) v[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
  if (!in_bounds(v)) return std::nullopt;
  return v;
}

void VoxelGrid::fill(const Obb& box) {
  Aabb bb{Vec3::Constant(std::numeric_limits<double>::infinity()),
          Vec3::Constant(-std::numeric_limits<double>::infinity())};
  bb.expand(box);
  Voxel lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((bb.min[a] - origin_[a]) / resolution_)));
    hi[a] = std::min(dims_[a] - 1,
                     static_cast<int>(std::floor((bb.max[a] - origin_[a]) / resolution_)));
    if (lo[a] > hi[a]) return;
  }
  const Vec3 half = Vec3::Constant(0.5 * resolution_);
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const Voxel v{i, j, k};
        const std::size_t idx = linear(v);
        if (occ_[idx]) continue;
        if (penetration_depth(Obb{center(v), half, 0.0}, box) > 0.0) occ_[idx] = 1;
      }
}

VoxelGrid voxelize(const WorldModel& world, double resolution, double inflate,
                   const Aabb& bounds, const std::vector<int>& ignore_ids) {
  if (!(resolution > 0)) throw std::invalid_argument("voxelize: resolution must be > 0");
  Vec3 origin;
  std::array<int, 3> dims;
  for (int a = 0; a < 3; ++a) {
    const double lo = std::floor(bounds.min[a] / resolution);
    const double hi = std::ceil(bounds.max[a] / resolution);
    origin[a] = lo * resolution;
    dims[a] = std::max(1, static_cast<int>(hi - lo));
  }
  VoxelGrid grid(origin, resolution, dims);

  // Ground as a slab below its height, spanning the whole grid footprint.
  const Vec3 top = origin + resolution * Vec3(dims[0], dims[1], dims[2]);
  const double slab_bottom = std::min(origin.z(), world.ground().height) - 1.0;
  Obb slab;
  slab.center = Vec3(0.5 * (origin.x() + top.x()), 0.5 * (origin.y() + top.y()),
                     0.5 * (slab_bottom + world.ground().height));
  slab.half_extents = Vec3(0.5 * (top.x() - origin.x()) + 1.0, 0.5 * (top.y() - origin.y()) + 1.0,
                           0.5 * (world.ground().height - slab_bottom));
  grid.fill(slab.inflated(inflate));

  for (const Staircase& s : world.staircases())
    for (const Obb& solid : s.solids()) grid.fill(solid.inflated(inflate));
  for (const TrackedObject& o : world.objects()) {
    if (std::find(ignore_ids.begin(), ignore_ids.end(), o.id) != ignore_ids.end()) continue;
    grid.fill(o.obb.inflated(inflate));
  }
  return grid;
}

VoxelGrid voxelize(const WorldModel& world, double resolution, double inflate) {
  const GroundPlane& g = world.ground();
  double top = g.height;
  for (const Staircase& s : world.staircases()) top = std::max(top, s.top_height());
  Aabb bounds{Vec3(g.min.x(), g.min.y(), g.height - resolution),
              Vec3(g.max.x(), g.max.y(), top + 1.0)};
  return voxelize(world, resolution, inflate, bounds);
}

double move_cost(std::int64_t n1, std::int64_t n2, std::int64_t n3, double resolution) {
  return (static_cast<double>(n1) + static_cast<double>(n2) * kSqrt2 +
          static_cast<double>(n3) * kSqrt3) *
         resolution;
}

GridPath astar(const VoxelGrid& grid, const Voxel& start, const Voxel& goal) {
  for (const Voxel* v : {&start, &goal}) {
    if (!grid.in_bounds(*v))
      throw PlanningError(PlanningError::Kind::InvalidEndpoint,
                          "astar: endpoint " + voxel_str(*v) + " outside grid");
    if (grid.occupied(*v))
      throw PlanningError(PlanningError::Kind::InvalidEndpoint,
                          "astar: endpoint " + voxel_str(*v) + " is occupied");
  }
  const double res = grid.resolution();
  const std::size_t n = grid.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  struct Node {
    std::int32_t c[3] = {0, 0, 0};
    double g = std::numeric_limits<double>::infinity();
    std::size_t parent = kNone;
    bool closed = false;
  };
  std::vector<Node> nodes(n);
  auto heuristic = [&](const Voxel& v) {
    const double dx = v[0] - goal[0], dy = v[1] - goal[1], dz = v[2] - goal[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz) * res;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s = grid.linear(start), t = grid.linear(goal);
  nodes[s].g = 0.0;
  open.emplace(heuristic(start), s);

  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    Node& node = nodes[cur];
    if (node.closed) continue;
    node.closed = true;
    if (cur == t) break;
    const Voxel v = grid.from_linear(cur);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const int kind = std::abs(dx) + std::abs(dy) + std::abs(dz);
          if (kind == 0) continue;
          const Voxel w{v[0] + dx, v[1] + dy, v[2] + dz};
          if (!grid.in_bounds(w) || grid.occupied(w)) continue;
          const std::size_t wi = grid.linear(w);
          Node& nb = nodes[wi];
          if (nb.closed) continue;
          std::int32_t c[3] = {node.c[0], node.c[1], node.c[2]};
          ++c[kind - 1];
          const double g = move_cost(c[0], c[1], c[2], res);
          if (g < nb.g) {
            nb.g = g;
            std::copy(c, c + 3, nb.c);
            nb.parent = cur;
            open.emplace(g + heuristic(w), wi);
          }
        }
  }
  if (!nodes[t].closed)
    throw PlanningError(PlanningError::Kind::NoPath,
                        "astar: no path from " + voxel_str(start) + " to " + voxel_str(goal));

  GridPath path;
  path.cost = nodes[t].g;
  for (std::size_t i = t; i != kNone; i = nodes[i].parent) path.voxels.push_back(grid.from_linear(i));
  std::reverse(path.voxels.begin(), path.voxels.end());
  return path;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Approach: return "approach";
    case Phase::Push: return "push";
    case Phase::Return: return "return";
  }
  return "?";
}

namespace {

Aabb task_bounds(std::span<const Vec3> points, double margin) {
  Aabb bb{points.front(), points.front()};
  for (const Vec3& p : points) bb.expand(p);
  bb.min -= Vec3::Constant(margin);
  bb.max += Vec3::Constant(margin);
  return bb;
}

Voxel require_voxel(const VoxelGrid& grid, const Vec3& p, const char* what) {
  const auto v = grid.locate(p);
  if (!v)
    throw PlanningError(PlanningError::Kind::InvalidEndpoint,
                        std::string(what) + " lies outside the planning grid");
  return *v;
}

// Appends points from the last waypoint to `to` in steps no longer than `step`.
void densify_to(FootTrajectory& traj, const Vec3& to, double step, Phase ph) {
  const Vec3 from = traj.waypoints.back();
  const double len = (to - from).norm();
  const int n = static_cast<int>(std::ceil(len / step - 1e-9));
  for (int i = 1; i <= n; ++i) traj.append(from + (to - from) * (double(i) / n), ph);
}

void append_voxels(FootTrajectory& traj, const VoxelGrid& grid, const GridPath& path, Phase ph) {
  for (const Voxel& v : path.voxels) traj.append(grid.center(v), ph);
}

}  // namespace

FootTrajectory plan_foot_trajectory(const Vec3& foot_pos, const MotionPrimitive& primitive,
                                    const WorldModel& world, const PlanningParams& params) {
  if (primitive.path.size() < 2)
    throw std::invalid_argument("plan_foot_trajectory: primitive path is empty");
  const TrackedObject& target = world.get(primitive.object_id);
  const Vec3 offset = primitive.contact_point - primitive.path.front();
  const Vec3 contact_end = primitive.path.back() + offset;

  const Vec3 pts[] = {foot_pos, primitive.contact_point, contact_end};
  Aabb bounds = task_bounds(pts, params.margin);
  bounds.expand(target.obb);
  const VoxelGrid approach_grid = voxelize(world, params.resolution, params.inflate, bounds);

  const Voxel start = require_voxel(approach_grid, foot_pos, "foot position");
  // Nearest free voxel behind the contact point.
  std::optional<Voxel> goal;
  for (double back = 0.0; back <= params.max_retract; back += 0.5 * params.resolution) {
    const auto v = approach_grid.locate(primitive.contact_point - primitive.axis * back);
    if (v && !approach_grid.occupied(*v)) {
      goal = v;
      break;
    }
  }
  if (!goal)
    throw PlanningError(PlanningError::Kind::NoPath,
                        "plan_foot_trajectory: no free voxel behind the contact point");

  const GridPath approach = astar(approach_grid, start, *goal);
  FootTrajectory traj;
  traj.append(foot_pos, Phase::Approach);
  append_voxels(traj, approach_grid, approach, Phase::Approach);

  densify_to(traj, primitive.contact_point, params.resolution, Phase::Push);
  for (std::size_t i = 1; i < primitive.path.size(); ++i)
    densify_to(traj, primitive.path[i] + offset, params.resolution, Phase::Push);
  return traj;
}

FootTrajectory plan_return(const Vec3& foot_pos, const Vec3& rest_pos, const WorldModel& world,
                           const PlanningParams& params, std::optional<Vec3> retract_dir) {
  FootTrajectory traj;
  traj.append(foot_pos, Phase::Return);
  if ((rest_pos - foot_pos).norm() == 0.0) return traj;

  // Retraction candidates: back along retract_dir, then straight up.
  std::vector<Vec3> dirs;
  if (retract_dir) dirs.push_back(retract_dir->normalized());
  dirs.push_back(Vec3::UnitZ());
  std::vector<Vec3> corners{foot_pos, rest_pos};
  for (const Vec3& d : dirs) corners.push_back(foot_pos + d * params.max_retract);
  const Aabb bounds = task_bounds(corners, params.margin);
  const VoxelGrid grid = voxelize(world, params.resolution, params.inflate, bounds);

  Voxel start = require_voxel(grid, foot_pos, "foot position");
  if (grid.occupied(start) && retract_dir) {
    bool found = false;
    for (const Vec3& dir : dirs) {
      for (double back = 0.0; back <= params.max_retract && !found; back += 0.5 * params.resolution) {
        const auto v = grid.locate(foot_pos + dir * back);
        if (v && !grid.occupied(*v)) {
          densify_to(traj, grid.center(*v), params.resolution, Phase::Return);
          start = *v;
          found = true;
        }
      }
      if (found) break;
    }
  }
  const Voxel goal = require_voxel(grid, rest_pos, "rest position");
  const GridPath path = astar(grid, start, goal);
  if (traj.size() == 1) traj.append(grid.center(start), Phase::Return);
  for (std::size_t i = 1; i < path.voxels.size(); ++i)
    traj.append(grid.center(path.voxels[i]), Phase::Return);
  traj.append(rest_pos, Phase::Return);
  return traj;
}

}  // namespace stairclear
