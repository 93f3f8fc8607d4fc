#pragma once

#include "stairclear/world_model.hpp"

#include <initializer_list>
#include <vector>

namespace stairclear {

struct PrimitiveParams {
  double step_size = 0.02;
  /// Vertical tolerance between an OBB's bottom face and a supporting surface.
  double support_height_tol = 0.02;
  /// Penetration at or below this depth still counts as touching.
  double collision_tol = 1e-3;
  /// Precision of the final, shorter path segment.
  double boundary_precision = 1e-4;
};

/// True iff `obb` penetrates no stair solid and no other object's OBB by more
/// than `tol`. Objects with id `ignore_id` are skipped.
bool check_collision_free(const Obb& obb, const WorldModel& world, int ignore_id = -1,
                          double tol = 1e-3);

/// True iff all four bottom-face vertices lie on some navigable surface
/// (closed footprint, within `height_tol` vertically).
bool check_support(const Obb& obb, const WorldModel& world, double height_tol = 0.02);

/// Push-left/push-right paths obtained by translating the OBB along the step
/// axis until either check fails. Zero-length primitives are omitted.
/// Throws std::logic_error for static objects.
std::vector<MotionPrimitive> generate_primitives(
    const TrackedObject& object, const WorldModel& world, const PrimitiveParams& params = {},
    std::initializer_list<PushDirection> directions = {PushDirection::Left,
                                                       PushDirection::Right});

/// Unit world-frame push direction for `dir` on the staircase that supports `obb`.
Vec3 push_axis(const Obb& obb, PushDirection dir);

/// Regenerates primitives for every potentially movable object in the world.
void refresh_primitives(WorldModel& world, const PrimitiveParams& params = {});

}  // namespace stairclear
