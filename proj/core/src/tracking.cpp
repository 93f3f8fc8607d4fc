#include "stairclear/tracking.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stairclear {

double obb_iou(const Obb& a, const Obb& b) {
  if (std::abs(wrap_angle(a.yaw - b.yaw)) > 1e-6)
    throw std::invalid_argument("obb_iou: boxes must share the same yaw");
  const Vec3 ca = rotate_yaw(a.center, -a.yaw);
  const Vec3 cb = rotate_yaw(b.center, -a.yaw);
  double inter = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::max(ca[i] - a.half_extents[i], cb[i] - b.half_extents[i]);
    const double hi = std::min(ca[i] + a.half_extents[i], cb[i] + b.half_extents[i]);
    inter *= std::max(0.0, hi - lo);
  }
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Association associate(std::span<const Cluster> clusters,
                      std::span<const AssociationTarget> targets, double iou_min) {
  struct Candidate {
    double iou;
    std::size_t cluster;
    std::size_t target;
  };
  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const double iou = obb_iou(clusters[c].obb, targets[t].obb);
      if (iou >= iou_min && iou > 0.0) candidates.push_back({iou, c, t});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    if (x.cluster != y.cluster) return x.cluster < y.cluster;
    return x.target < y.target;
  });

  Association out;
  std::vector<bool> cluster_used(clusters.size(), false), target_used(targets.size(), false);
  for (const auto& cand : candidates) {
    if (cluster_used[cand.cluster] || target_used[cand.target]) continue;
    cluster_used[cand.cluster] = target_used[cand.target] = true;
    out.matches.push_back({cand.cluster, targets[cand.target].id, cand.iou});
  }
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (!cluster_used[c]) out.unmatched_clusters.push_back(c);
  for (std::size_t t = 0; t < targets.size(); ++t)
    if (!target_used[t]) out.unmatched_targets.push_back(targets[t].id);
  return out;
}

IcpResult icp_merge(std::span<const Vec3> existing, std::span<const Vec3> incoming,
                    double obb_yaw, const IcpParams& params, const Vec3& initial_translation) {
  if (existing.empty() || incoming.empty())
    throw std::invalid_argument("icp_merge: both clouds must be non-empty");

  IcpResult result;
  double cos_r = 1.0, sin_r = 0.0;  // accumulated rotation
  Vec3 t = initial_translation;
  auto apply = [&](const Vec3& p) {
    return Vec3(cos_r * p.x() - sin_r * p.y() + t.x(), sin_r * p.x() + cos_r * p.y() + t.y(),
                p.z() + t.z());
  };

  if (incoming.size() >= 3) {
    // Coarse to fine: converge at one radius, then halve it. Small radii keep
    // points outside the overlap of two partial views from dragging the fit.
    const double r_min = std::min(params.max_correspondence, params.min_correspondence);
    // Cells much larger than the point spacing make every lookup a scan.
    const SpatialHash index(existing, r_min);
    double radius = params.max_correspondence;
    double prev_mean = std::numeric_limits<double>::infinity();
    std::vector<Vec3> src, dst;
    for (int iter = 0; iter < params.max_iter; ++iter) {
      src.clear();
      dst.clear();
      double sum = 0.0;
      for (const Vec3& p : incoming) {
        const Vec3 q = apply(p);
        if (auto j = index.nearest(q, radius)) {
          src.push_back(q);
          dst.push_back(existing[*j]);
          sum += (existing[*j] - q).norm();
        }
      }
      if (src.size() < 3) break;
      const double mean = sum / static_cast<double>(src.size());
      result.mean_distance = mean;
      if (prev_mean - mean < params.tol) {
        if (radius <= r_min) break;
        radius = std::max(r_min, 0.5 * radius);
        prev_mean = std::numeric_limits<double>::infinity();
        continue;
      }
      prev_mean = mean;

      const Vec3 ps = centroid(src), qs = centroid(dst);
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 a = src[i] - ps, b = dst[i] - qs;
        sxx += a.x() * b.x() + a.y() * b.y();
        sxy += a.x() * b.y() - a.y() * b.x();
      }
      // Yaw only once the radius is fine; at coarse radii it is poorly constrained.
      const double theta = radius <= r_min ? std::atan2(sxy, sxx) : 0.0;
      const double c = std::cos(theta), s = std::sin(theta);
      const Vec3 rotated_ps(c * ps.x() - s * ps.y(), s * ps.x() + c * ps.y(), ps.z());
      const Vec3 dt = qs - rotated_ps;
      // Compose the increment with the current transform.
      const double nc = c * cos_r - s * sin_r, ns = s * cos_r + c * sin_r;
      t = Vec3(c * t.x() - s * t.y(), s * t.x() + c * t.y(), t.z()) + dt;
      cos_r = nc;
      sin_r = ns;
      result.iterations = iter + 1;
      result.aligned = true;
    }
  }

  std::vector<Vec3> moved;
  moved.reserve(incoming.size());
  for (const Vec3& p : incoming) moved.push_back(apply(p));
  {
    const double r = 2.0 * params.voxel;
    const SpatialHash moved_index(moved, r);
    std::size_t hits = 0;
    for (const Vec3& p : existing)
      if (moved_index.nearest(p, r)) ++hits;
    result.fitness = static_cast<double>(hits) / static_cast<double>(existing.size());
  }
  std::vector<Vec3> all(existing.begin(), existing.end());
  all.insert(all.end(), moved.begin(), moved.end());
  result.obb = fit_stair_aligned_obb(all, obb_yaw);
  result.merged = voxel_downsample(all, params.voxel);
  result.translation = t;
  result.yaw = std::atan2(sin_r, cos_r);
  return result;
}

PredictionState begin_interaction(const WorldModel& world, int object_id,
                                  const MotionPrimitive& primitive) {
  const TrackedObject& obj = world.get(object_id);
  if (obj.is_static())
    throw std::logic_error("begin_interaction: object " + std::to_string(object_id) +
                           " is static");
  if (primitive.object_id != object_id || primitive.path.empty())
    throw std::invalid_argument("begin_interaction: primitive does not belong to object");
  PredictionState st;
  st.object_id = object_id;
  st.active = true;
  st.start_obb = obj.obb;
  st.predicted_obb = obj.obb;
  st.primitive = primitive;
  st.displacement = 0.0;
  return st;
}

double project_onto_polyline(std::span<const Vec3> path, const Vec3& p) {
  if (path.empty()) return 0.0;
  double best_d2 = (p - path.front()).squaredNorm();
  double best_s = 0.0;
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec3 seg = path[i + 1] - path[i];
    const double len2 = seg.squaredNorm();
    const double len = std::sqrt(len2);
    double u = len2 > 0 ? std::clamp((p - path[i]).dot(seg) / len2, 0.0, 1.0) : 0.0;
    const double d2 = (path[i] + u * seg - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = arc + u * len;
    }
    arc += len;
  }
  return best_s;
}

namespace {

Vec3 point_at_arc(std::span<const Vec3> path, double s) {
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec3 seg = path[i + 1] - path[i];
    const double len = seg.norm();
    if (s <= arc + len && len > 0) return path[i] + seg * ((s - arc) / len);
    arc += len;
  }
  return path.back();
}

}  // namespace

PredictionState update_prediction(const PredictionState& state, const Vec3& foot_pos) {
  if (!state.active) throw std::logic_error("update_prediction: prediction is not active");
  const auto& prim = state.primitive;
  const Vec3 offset = prim.contact_point - prim.path.front();
  std::vector<Vec3> contact_path;
  contact_path.reserve(prim.path.size());
  for (const Vec3& c : prim.path) contact_path.push_back(c + offset);

  PredictionState next = state;
  const double s = project_onto_polyline(contact_path, foot_pos);
  next.displacement = std::clamp(std::max(state.displacement, s), 0.0, prim.length());
  next.predicted_obb = state.start_obb.translated(point_at_arc(prim.path, next.displacement) -
                                                  prim.path.front());
  return next;
}

namespace {

// The fresh scan is aligned onto the stored cloud. Box centers of partial
// views are biased and a prediction can be far off when contact went
// unnoticed, so ICP also starts from the box offset; that result replaces the
// hinted one only if it both covers more and fits tighter. The stored cloud
// is then carried back into the fresh pose.
void merge_cluster(WorldModel& world, int id, const Cluster& cluster, double time,
                   const TrackingParams& params, const std::optional<Vec3>& hint) {
  const TrackedObject& obj = world.get(id);
  const Vec3 box_offset = cluster.obb.center - obj.obb.center;
  IcpResult icp = icp_merge(obj.cloud, cluster.points, obj.obb.yaw, params.icp,
                            -(hint ? *hint - obj.obb.center : box_offset));
  if (hint) {
    IcpResult alt = icp_merge(obj.cloud, cluster.points, obj.obb.yaw, params.icp, -box_offset);
    if (alt.fitness > icp.fitness && alt.mean_distance <= icp.mean_distance) icp = std::move(alt);
  }
  // Inverse of p' = R(yaw) p + t.
  const double yaw = -icp.yaw;
  const Vec3 t = -rotate_yaw(icp.translation, yaw);

  // Box from the full union; the stored cloud is the downsampled one.
  std::vector<Vec3> all = cluster.points;
  for (const Vec3& p : obj.cloud) all.push_back(rotate_yaw(p, yaw) + t);
  Cluster refit = fit_resting_cluster(all, world, params.perception);
  refit.points = voxel_downsample(all, params.icp.voxel);
  if (refit.obb.yaw != obj.obb.yaw) {
    refit.obb = fit_stair_aligned_obb(refit.points, obj.obb.yaw);
    refit.obb.half_extents = refit.obb.half_extents.cwiseMax(params.perception.min_half_extent);
  }
  snap_to_tread(refit.obb, world, params.tread_snap);
  world.update_geometry(id, std::move(refit.points), refit.obb, refit.support, time);
  world.set_low_confidence(id, false);
}

ScanUpdate apply_scan(WorldModel& world, std::span<const Cluster> clusters, double time,
                      const TrackingParams& params, std::span<const AssociationTarget> overrides) {
  std::vector<AssociationTarget> targets;
  for (const auto& obj : world.objects()) {
    AssociationTarget t{obj.id, obj.obb};
    for (const auto& o : overrides)
      if (o.id == obj.id) t.obb = o.obb;
    targets.push_back(t);
  }
  const Association assoc = associate(clusters, targets, params.iou_min);

  ScanUpdate out;
  out.matches = assoc.matches;
  for (const auto& m : assoc.matches) {
    std::optional<Vec3> hint = world.get(m.id).obb.center;
    for (const auto& o : overrides)
      if (o.id == m.id) hint = o.obb.center;
    merge_cluster(world, m.id, clusters[m.cluster], time, params, hint);
  }
  for (std::size_t c : assoc.unmatched_clusters) {
    const Cluster& cl = clusters[c];
    // A partial view (one face, a clipped corner) has a low IoU with the full
    // box but lies inside it. Objects under interaction are left to IoU alone.
    int host = -1;
    double best = params.containment_min;
    for (const auto& obj : world.objects()) {
      const bool overridden = std::any_of(overrides.begin(), overrides.end(),
                                          [&](const AssociationTarget& o) { return o.id == obj.id; });
      if (overridden || obj.obb.yaw != cl.obb.yaw) continue;
      std::size_t inside = 0;
      for (const Vec3& p : cl.points) inside += obj.obb.contains(p, kCloudMargin);
      const double share = static_cast<double>(inside) / static_cast<double>(cl.points.size());
      if (share >= best) {
        best = share;
        host = obj.id;
      }
    }
    if (host >= 0) {
      merge_cluster(world, host, cl, time, params, world.get(host).obb.center);
      out.absorbed.push_back(host);
      continue;
    }
    auto cloud = voxel_downsample(cl.points, params.icp.voxel);
    Obb box = cl.obb;
    snap_to_tread(box, world, params.tread_snap);
    out.new_ids.push_back(world.insert_object(std::move(cloud), box, cl.support, time));
  }
  return out;
}

}  // namespace

ScanUpdate update_world_from_scan(WorldModel& world, std::span<const Cluster> clusters,
                                  double time, const TrackingParams& params,
                                  std::span<const AssociationTarget> overrides) {
  ScanUpdate out = apply_scan(world, clusters, time, params, overrides);
  refresh_primitives(world, params.primitives);
  return out;
}

FinalizeOutcome finalize_interaction(WorldModel& world, int object_id, const Obb& target,
                                     std::span<const Cluster> clusters, double time,
                                     const TrackingParams& params) {
  world.get(object_id);  // throws on unknown id
  FinalizeOutcome out;
  out.target = target;

  const AssociationTarget override_target{object_id, target};
  const ScanUpdate scan = apply_scan(world, clusters, time, params, {&override_target, 1});
  out.new_ids = scan.new_ids;
  for (const auto& m : scan.matches) {
    if (m.id != object_id) continue;
    out.status = FinalizeStatus::Matched;
    out.iou = m.iou;
    out.corrected = world.get(object_id).obb;
  }
  if (out.status == FinalizeStatus::Lost) {
    const TrackedObject& obj = world.get(object_id);
    const Vec3 shift = target.center - obj.obb.center;
    std::vector<Vec3> cloud;
    cloud.reserve(obj.cloud.size());
    for (const Vec3& p : obj.cloud) cloud.push_back(p + shift);
    const SupportRef support = obj.support;
    world.update_geometry(object_id, std::move(cloud), target, support, time);
    world.set_low_confidence(object_id, true);
  }
  refresh_primitives(world, params.primitives);
  return out;
}

}  // namespace stairclear
