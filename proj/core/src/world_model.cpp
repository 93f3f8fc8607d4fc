#include "stairclear/world_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace stairclear {

std::string_view to_string(PushDirection d) {
  return d == PushDirection::Left ? "left" : "right";
}

std::string_view to_string(MovabilityTag t) {
  return t == MovabilityTag::Static ? "static" : "movable";
}

double MotionPrimitive::length() const {
  return path.empty() ? 0.0 : (path.back() - path.front()).norm();
}

OrientedRect Staircase::tread(int step) const {
  const Vec3 c = to_world({0.5 * width, (step - 0.5) * tread_depth, 0.0});
  return {c.head<2>(), {0.5 * width, 0.5 * tread_depth}, yaw};
}

Obb Staircase::column(int step) const {
  const double h = step * riser_height;
  Obb box;
  box.center = to_world({0.5 * width, (step - 0.5) * tread_depth, 0.5 * h});
  box.half_extents = {0.5 * width, 0.5 * tread_depth, 0.5 * h};
  box.yaw = yaw;
  return box;
}

std::vector<Obb> Staircase::solids() const {
  std::vector<Obb> out;
  out.reserve(num_steps + 2);
  for (int k = 1; k <= num_steps; ++k) out.push_back(column(k));
  const double depth = num_steps * tread_depth;
  const double height = num_steps * riser_height + kWallClearance;
  auto wall = [&](double s_center) {
    Obb box;
    box.center = to_world({s_center, 0.5 * depth, 0.5 * height});
    box.half_extents = {0.5 * kWallThickness, 0.5 * depth, 0.5 * height};
    box.yaw = yaw;
    return box;
  };
  if (wall_left) out.push_back(wall(-0.5 * kWallThickness));
  if (wall_right) out.push_back(wall(width + 0.5 * kWallThickness));
  return out;
}

OrientedRect Staircase::footprint() const {
  const double depth = num_steps * tread_depth;
  const Vec3 c = to_world({0.5 * width, 0.5 * depth, 0.0});
  return {c.head<2>(), {0.5 * width, 0.5 * depth}, yaw};
}

void Staircase::validate() const {
  if (num_steps < 1) throw std::invalid_argument("staircase.num_steps must be >= 1");
  if (!(tread_depth > 0)) throw std::invalid_argument("staircase.tread_depth must be > 0");
  if (!(riser_height > 0)) throw std::invalid_argument("staircase.riser_height must be > 0");
  if (!(width > 0)) throw std::invalid_argument("staircase.width must be > 0");
  if (!origin.allFinite() || !std::isfinite(yaw))
    throw std::invalid_argument("staircase.origin must be finite");
}

OrientedRect GroundPlane::rect() const {
  return {0.5 * (min + max), 0.5 * (max - min), 0.0};
}

void GroundPlane::validate() const {
  if (!(max.x() > min.x() && max.y() > min.y()))
    throw std::invalid_argument("ground.extent must have positive area");
}

const MotionPrimitive* TrackedObject::primitive(PushDirection d) const {
  for (const auto& p : movability.primitives)
    if (p.direction == d) return &p;
  return nullptr;
}

MovabilityTag classify_by_size(const Obb& obb, const Vec3& limits) {
  if (!(limits.array() > 0).all()) throw std::invalid_argument("size limits must be > 0");
  const Vec3 ext = obb.full_extents();
  for (int i = 0; i < 3; ++i)
    if (ext[i] > limits[i]) return MovabilityTag::Static;
  return MovabilityTag::PotentiallyMovable;
}

WorldModel::WorldModel(std::vector<Staircase> staircases, GroundPlane ground, Vec3 size_limits)
    : staircases_(std::move(staircases)), ground_(ground), size_limits_(size_limits) {
  for (const auto& s : staircases_) s.validate();
  ground_.validate();
  if (!(size_limits_.array() > 0).all()) throw std::invalid_argument("size limits must be > 0");
}

const Staircase& WorldModel::staircase(int id) const {
  for (const auto& s : staircases_)
    if (s.id == id) return s;
  throw std::out_of_range("unknown staircase id " + std::to_string(id));
}

const Staircase& WorldModel::staircase_near(const Vec2& xy) const {
  if (staircases_.empty()) throw std::logic_error("world has no staircase");
  const Staircase* best = &staircases_.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : staircases_) {
    const double d = s.footprint().distance(xy);
    if (d < best_d) {
      best_d = d;
      best = &s;
    }
  }
  return *best;
}

void WorldModel::check_stair_aligned(const Obb& obb) const {
  if (staircases_.empty()) return;
  for (const auto& s : staircases_)
    if (s.yaw == obb.yaw) return;
  throw std::invalid_argument("object OBB is not aligned with any staircase step axis");
}

int WorldModel::insert_object(std::vector<Vec3> cloud, const Obb& obb, SupportRef support,
                              double time) {
  if (cloud.empty()) throw std::invalid_argument("insert_object: empty point cloud");
  if (!(obb.half_extents.array() > 0).all())
    throw std::invalid_argument("insert_object: OBB half extents must be > 0");
  check_stair_aligned(obb);
  for (const Vec3& p : cloud)
    if (!obb.contains(p, kCloudMargin))
      throw std::invalid_argument("insert_object: cloud point outside OBB margin");

  TrackedObject obj;
  obj.id = next_id_++;
  obj.cloud = std::move(cloud);
  obj.obb = obb;
  obj.movability.tag = classify_by_size(obb, size_limits_);
  obj.support = support;
  obj.last_update_time = time;
  objects_.push_back(std::move(obj));
  return objects_.back().id;
}

const TrackedObject* WorldModel::find(int id) const {
  for (const auto& o : objects_)
    if (o.id == id) return &o;
  return nullptr;
}

const TrackedObject& WorldModel::get(int id) const {
  if (const auto* o = find(id)) return *o;
  throw std::out_of_range("unknown object id " + std::to_string(id));
}

TrackedObject& WorldModel::get_mut(int id) {
  for (auto& o : objects_)
    if (o.id == id) return o;
  throw std::out_of_range("unknown object id " + std::to_string(id));
}

void WorldModel::set_movability(int id, MovabilityTag tag) {
  auto& obj = get_mut(id);
  if (obj.movability.tag == MovabilityTag::Static && tag != MovabilityTag::Static)
    throw std::logic_error("object " + std::to_string(id) + " is static; cannot become movable");
  obj.movability.tag = tag;
  if (tag == MovabilityTag::Static) obj.movability.primitives.clear();
}

void WorldModel::set_primitives(int id, std::vector<MotionPrimitive> primitives) {
  auto& obj = get_mut(id);
  if (obj.is_static()) return;
  obj.movability.primitives = std::move(primitives);
}

void WorldModel::update_geometry(int id, std::vector<Vec3> cloud, const Obb& obb,
                                 SupportRef support, double time) {
  if (cloud.empty()) throw std::invalid_argument("update_geometry: empty point cloud");
  check_stair_aligned(obb);
  auto& obj = get_mut(id);
  obj.cloud = std::move(cloud);
  obj.obb = obb;
  obj.support = support;
  obj.last_update_time = time;
}

void WorldModel::set_low_confidence(int id, bool flag) { get_mut(id).low_confidence = flag; }

bool WorldModel::erase(int id) {
  const auto it = std::find_if(objects_.begin(), objects_.end(),
                               [id](const TrackedObject& o) { return o.id == id; });
  if (it == objects_.end()) return false;
  objects_.erase(it);
  return true;
}

std::vector<Surface> WorldModel::navigable_surfaces() const {
  std::vector<Surface> out;
  for (const auto& s : staircases_)
    for (int k = 1; k <= s.num_steps; ++k)
      out.push_back({s.tread(k), s.tread_height(k), {s.id, k}});
  out.push_back({ground_.rect(), ground_.height, {}});
  return out;
}

std::optional<Surface> surface_below(const std::vector<Surface>& surfaces, const Vec2& xy,
                                     double z, double tol) {
  std::optional<Surface> best;
  for (const auto& s : surfaces) {
    if (s.height > z + tol || !s.rect.contains(xy)) continue;
    if (!best || s.height > best->height) best = s;
  }
  return best;
}

}  // namespace stairclear
