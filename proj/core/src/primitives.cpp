#include "stairclear/primitives.hpp"

#include <stdexcept>
#include <string>

namespace stairclear {

bool check_collision_free(const Obb& obb, const WorldModel& world, int ignore_id, double tol) {
  for (const auto& stair : world.staircases())
    for (const Obb& solid : stair.solids())
      if (penetration_depth(obb, solid) > tol) return false;
  for (const auto& other : world.objects()) {
    if (other.id == ignore_id) continue;
    if (penetration_depth(obb, other.obb) > tol) return false;
  }
  return true;
}

bool check_support(const Obb& obb, const WorldModel& world, double height_tol) {
  const auto surfaces = world.navigable_surfaces();
  const double bottom = obb.bottom();
  for (const Vec3& corner : obb.bottom_corners()) {
    bool supported = false;
    for (const auto& s : surfaces) {
      if (std::abs(bottom - s.height) <= height_tol && s.rect.contains(corner.head<2>())) {
        supported = true;
        break;
      }
    }
    if (!supported) return false;
  }
  return true;
}

Vec3 push_axis(const Obb& obb, PushDirection dir) {
  const double sign = dir == PushDirection::Right ? 1.0 : -1.0;
  return {sign * std::cos(obb.yaw), sign * std::sin(obb.yaw), 0.0};
}

std::vector<MotionPrimitive> generate_primitives(const TrackedObject& object,
                                                 const WorldModel& world,
                                                 const PrimitiveParams& params,
                                                 std::initializer_list<PushDirection> directions) {
  if (object.is_static())
    throw std::logic_error("generate_primitives: object " + std::to_string(object.id) +
                           " is static");
  if (!(params.step_size > 0)) throw std::invalid_argument("step_size must be > 0");

  auto feasible = [&](const Obb& box) {
    return check_collision_free(box, world, object.id, params.collision_tol) &&
           check_support(box, world, params.support_height_tol);
  };

  std::vector<MotionPrimitive> out;
  const Obb& start = object.obb;
  if (!feasible(start)) return out;

  // Upper bound on sweep length: no surface is longer than the scene diagonal.
  const Vec2 extent = world.ground().max - world.ground().min;
  double max_travel = extent.norm();
  for (const auto& s : world.staircases()) max_travel = std::max(max_travel, s.width);
  const int max_steps = static_cast<int>(max_travel / params.step_size) + 2;

  for (PushDirection dir : directions) {
    const Vec3 axis = push_axis(start, dir);
    auto at = [&](double offset) { return start.translated(axis * offset); };

    int n = 0;
    while (n < max_steps && feasible(at((n + 1) * params.step_size))) ++n;

    MotionPrimitive prim;
    prim.object_id = object.id;
    prim.direction = dir;
    prim.axis = axis;
    prim.step_size = params.step_size;
    prim.contact_point = start.center - axis * start.half_extents.x();
    for (int i = 0; i <= n; ++i) prim.path.push_back(start.center + axis * (i * params.step_size));

    double lo = n * params.step_size;
    double hi = (n + 1) * params.step_size;
    while (hi - lo > params.boundary_precision) {
      const double mid = 0.5 * (lo + hi);
      (feasible(at(mid)) ? lo : hi) = mid;
    }
    if (lo - n * params.step_size > params.boundary_precision)
      prim.path.push_back(start.center + axis * lo);

    if (prim.path.size() > 1) out.push_back(std::move(prim));
  }
  return out;
}

void refresh_primitives(WorldModel& world, const PrimitiveParams& params) {
  std::vector<std::pair<int, std::vector<MotionPrimitive>>> updates;
  for (const auto& obj : world.objects())
    if (!obj.is_static()) updates.emplace_back(obj.id, generate_primitives(obj, world, params));
  for (auto& [id, prims] : updates) world.set_primitives(id, std::move(prims));
}

}  // namespace stairclear
