#include "stairclear/tracking.hpp"

#include "oracles.hpp"
#include "scenes.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stairclear;

namespace {

Staircase five_steps() {
  Staircase s;
  s.num_steps = 5;
  s.tread_depth = 0.3;
  s.riser_height = 0.17;
  s.width = 1.2;
  return s;
}

Obb box_on(const Staircase& s, int step, double lateral, Vec3 dims = Vec3(0.2, 0.2, 0.2)) {
  return Obb{s.to_world({lateral, (step - 0.5) * s.tread_depth,
                         s.tread_height(step) - s.origin.z() + 0.5 * dims.z()}),
             0.5 * dims, s.yaw};
}

// Grid samples on the five faces a camera above and in front could see.
std::vector<Vec3> surface_points(const Obb& b, double spacing = 0.02) {
  std::vector<Vec3> out;
  const Vec3 h = b.half_extents;
  auto face = [&](int axis, double sign) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const int nu = static_cast<int>(2 * h[u] / spacing), nv = static_cast<int>(2 * h[v] / spacing);
    for (int i = 0; i <= nu; ++i)
      for (int j = 0; j <= nv; ++j) {
        Vec3 p;
        p[axis] = sign * h[axis];
        p[u] = -h[u] + 2 * h[u] * i / nu;
        p[v] = -h[v] + 2 * h[v] * j / nv;
        out.push_back(b.to_world(p));
      }
  };
  face(0, 1);
  face(0, -1);
  face(1, -1);
  face(1, 1);
  face(2, 1);
  return out;
}

std::vector<Vec3> random_surface_points(const Obb& b, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const Vec3 h = b.half_extents;
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) {
    Vec3 p(u(rng) * h.x(), u(rng) * h.y(), u(rng) * h.z());
    switch (i % 5) {
      case 0: p.z() = h.z(); break;
      case 1: p.x() = h.x(); break;
      case 2: p.x() = -h.x(); break;
      case 3: p.y() = -h.y(); break;
      default: p.y() = h.y();
    }
    out.push_back(b.to_world(p));
  }
  return out;
}

Cluster cluster_of(const Obb& b, const WorldModel& w) {
  return fit_resting_cluster(surface_points(b), w);
}

}  // namespace

TEST(ObbIou, HalfOverlapIsOneThird) {
  const Obb a{Vec3::Zero(), Vec3::Constant(0.5), 0.3};
  const Obb b = a.translated(rotate_yaw(Vec3(0.5, 0, 0), 0.3));
  EXPECT_NEAR(obb_iou(a, b), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(obb_iou(a, a), 1.0);
  EXPECT_EQ(obb_iou(a, a.translated(Vec3(3, 0, 0))), 0.0);
}

TEST(ObbIou, RejectsMismatchedYaw) {
  const Obb a{Vec3::Zero(), Vec3::Constant(0.5), 0.0};
  const Obb b{Vec3::Zero(), Vec3::Constant(0.5), 0.1};
  EXPECT_THROW(obb_iou(a, b), std::invalid_argument);
}

TEST(ObbIou, SymmetricAndBounded) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    const double yaw = 3 * u(rng);
    const Obb a{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)) * 0.5, yaw};
    const Obb b{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)) * 0.5, yaw};
    const double ab = obb_iou(a, b);
    EXPECT_DOUBLE_EQ(ab, obb_iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(ObbIou, AgreesWithMonteCarlo) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10; ++i) {
    const double yaw = 3 * u(rng);
    const Obb a{Vec3(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)),
                Vec3(0.1, 0.1, 0.1) + 0.3 * Vec3(u(rng), u(rng), u(rng)), yaw};
    const Obb b{Vec3(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)),
                Vec3(0.1, 0.1, 0.1) + 0.3 * Vec3(u(rng), u(rng), u(rng)), yaw};
    EXPECT_NEAR(obb_iou(a, b), oracle::monte_carlo_iou(a, b, 200000, rng), 0.01);
  }
}

TEST(Associate, GreedyByDescendingIou) {
  const Obb base{Vec3::Zero(), Vec3::Constant(0.5), 0.0};
  std::vector<Cluster> clusters(2);
  clusters[0].obb = base.translated(Vec3(0.1, 0, 0));
  clusters[1].obb = base.translated(Vec3(0.4, 0, 0));
  const std::vector<AssociationTarget> targets = {{7, base}, {9, base.translated(Vec3(0.6, 0, 0))}};
  const Association a = associate(clusters, targets);
  ASSERT_EQ(a.matches.size(), 2u);
  EXPECT_EQ(a.matches[0].cluster, 0u);
  EXPECT_EQ(a.matches[0].id, 7);
  EXPECT_EQ(a.matches[1].cluster, 1u);
  EXPECT_EQ(a.matches[1].id, 9);
  EXPECT_TRUE(a.unmatched_clusters.empty());
  EXPECT_TRUE(a.unmatched_targets.empty());
}

TEST(Associate, ThresholdLeavesBothSidesUnmatched) {
  const Obb base{Vec3::Zero(), Vec3::Constant(0.5), 0.0};
  std::vector<Cluster> clusters(1);
  clusters[0].obb = base.translated(Vec3(0.7, 0, 0));  // IoU 0.3/1.7
  const std::vector<AssociationTarget> targets = {{1, base}};
  const Association a = associate(clusters, targets, 0.25);
  EXPECT_TRUE(a.matches.empty());
  EXPECT_EQ(a.unmatched_clusters, std::vector<std::size_t>{0});
  EXPECT_EQ(a.unmatched_targets, std::vector<int>{1});
  EXPECT_EQ(associate(clusters, targets, 0.15).matches.size(), 1u);
}

TEST(Associate, EveryClusterAndTargetAccountedForOnce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<Cluster> clusters(1 + t % 5);
    for (auto& c : clusters) c.obb = Obb{Vec3(u(rng), u(rng), 0), Vec3(0.3, 0.3, 0.3), 0.0};
    std::vector<AssociationTarget> targets;
    for (int k = 0; k < 1 + t % 4; ++k)
      targets.push_back({k, Obb{Vec3(u(rng), u(rng), 0), Vec3(0.3, 0.3, 0.3), 0.0}});
    const Association a = associate(clusters, targets);
    EXPECT_EQ(a.matches.size() + a.unmatched_clusters.size(), clusters.size());
    EXPECT_EQ(a.matches.size() + a.unmatched_targets.size(), targets.size());
    for (const auto& m : a.matches) EXPECT_GE(m.iou, 0.25);
  }
}

TEST(Icp, RecoversKnownShift) {
  // Two independent scans; a shared sampling lattice would alias.
  std::mt19937_64 rng(6);
  const Obb b{Vec3(0.5, 0.5, 0.2), Vec3(0.15, 0.1, 0.1), 0.0};
  const Vec3 shift(0.05, -0.03, 0.0);
  const auto existing = random_surface_points(b, 1500, rng);
  const auto incoming = random_surface_points(b.translated(shift), 1500, rng);
  const IcpResult r = icp_merge(existing, incoming, 0.0);
  EXPECT_TRUE(r.aligned);
  EXPECT_LT((r.translation + shift).norm(), 3e-3);
  EXPECT_LT(std::abs(r.yaw), 3e-3);
  EXPECT_GT(r.fitness, 0.95);
}

TEST(Icp, IdenticalCloudsNeedNoMotion) {
  const Obb b{Vec3(0.5, 0.5, 0.2), Vec3(0.15, 0.1, 0.1), 0.4};
  const auto pts = surface_points(b, 0.01);
  const IcpResult r = icp_merge(pts, pts, 0.4);
  EXPECT_LT(r.translation.norm(), 1e-9);
  EXPECT_LT(std::abs(r.yaw), 1e-9);
  EXPECT_NEAR(r.obb.volume(), b.volume(), 1e-9);
}

TEST(Icp, TinyIncomingIsUnionedWithoutAlignment) {
  const Obb b{Vec3(0.5, 0.5, 0.2), Vec3(0.15, 0.1, 0.1), 0.0};
  const auto pts = surface_points(b, 0.02);
  const std::vector<Vec3> two = {Vec3(0.9, 0.5, 0.2), Vec3(0.9, 0.6, 0.2)};
  const IcpResult r = icp_merge(pts, two, 0.0);
  EXPECT_FALSE(r.aligned);
  EXPECT_TRUE(r.obb.contains(two[0], 1e-9));
}

TEST(Prediction, FollowsFootAlongContactPath) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = box_on(s, 2, 0.4);
  const int id = w.insert_object(scenes::corners(b), b);
  refresh_primitives(w);
  const MotionPrimitive* p = w.get(id).primitive(PushDirection::Right);
  ASSERT_NE(p, nullptr);
  ASSERT_GT(p->length(), 0.2);

  PredictionState st = begin_interaction(w, id, *p);
  EXPECT_TRUE(st.active);
  EXPECT_EQ(st.predicted_obb.center, b.center);

  // Foot 0.12 along the contact path, a little off to the side.
  st = update_prediction(st, p->contact_point + 0.12 * p->axis + Vec3(0, 0.01, 0.02));
  EXPECT_NEAR(st.displacement, 0.12, 1e-12);
  EXPECT_TRUE(st.predicted_obb.center.isApprox(b.center + 0.12 * p->axis, 1e-12));

  // Moving back does not undo the push.
  st = update_prediction(st, p->contact_point + 0.05 * p->axis);
  EXPECT_NEAR(st.displacement, 0.12, 1e-12);
  st = update_prediction(st, p->contact_point + 0.2 * p->axis);
  EXPECT_NEAR(st.displacement, 0.2, 1e-12);

  // Past the end the prediction stops at the path end.
  st = update_prediction(st, p->contact_point + 5.0 * p->axis);
  EXPECT_NEAR(st.displacement, p->length(), 1e-12);
  EXPECT_TRUE(st.predicted_obb.center.isApprox(p->expected_end(), 1e-12));
}

TEST(Prediction, GuardsBadInput) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = box_on(s, 2, 0.4);
  const int id = w.insert_object(scenes::corners(b), b);
  refresh_primitives(w);
  MotionPrimitive p = *w.get(id).primitive(PushDirection::Right);
  EXPECT_THROW(update_prediction(PredictionState{}, Vec3::Zero()), std::logic_error);
  p.object_id = id + 1;
  EXPECT_THROW(begin_interaction(w, id, p), std::invalid_argument);
  p.object_id = id;
  w.set_movability(id, MovabilityTag::Static);
  EXPECT_THROW(begin_interaction(w, id, p), std::logic_error);
}

TEST(ProjectOntoPolyline, ArcLength) {
  const std::vector<Vec3> path = {Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 1, 0)};
  EXPECT_NEAR(project_onto_polyline(path, Vec3(0.3, 0.2, 0)), 0.3, 1e-12);
  EXPECT_NEAR(project_onto_polyline(path, Vec3(1.2, 0.5, 0)), 1.5, 1e-12);
  EXPECT_NEAR(project_onto_polyline(path, Vec3(-1, 0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(project_onto_polyline(path, Vec3(1, 3, 0)), 2.0, 1e-12);
}

TEST(Finalize, MatchCorrectsPoseAndRefreshesPrimitives) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = box_on(s, 2, 0.4);
  const int id = w.insert_object(surface_points(b), b);
  refresh_primitives(w);
  const double before = w.get(id).primitive(PushDirection::Right)->length();

  // The object really moved 0.15; the prediction says 0.12.
  const Obb moved = b.translated(scenes::step_dir(s) * 0.15);
  const Obb predicted = b.translated(scenes::step_dir(s) * 0.12);
  const std::vector<Cluster> clusters = {cluster_of(moved, w)};
  const FinalizeOutcome out = finalize_interaction(w, id, predicted, clusters, 1.0);
  ASSERT_EQ(out.status, FinalizeStatus::Matched);
  ASSERT_TRUE(out.corrected.has_value());
  EXPECT_LT((out.corrected->center - moved.center).norm(), 0.01);
  EXPECT_TRUE(out.new_ids.empty());
  EXPECT_FALSE(w.get(id).low_confidence);
  EXPECT_NEAR(w.get(id).primitive(PushDirection::Right)->length(), before - 0.15, 0.01);
  for (const Vec3& p : w.get(id).cloud) EXPECT_TRUE(w.get(id).obb.contains(p, kCloudMargin));
}

TEST(Finalize, NoClusterKeepsPredictionWithLowConfidence) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = box_on(s, 2, 0.4);
  const int id = w.insert_object(surface_points(b), b);
  const Obb predicted = b.translated(scenes::step_dir(s) * 0.12);
  const FinalizeOutcome out = finalize_interaction(w, id, predicted, {}, 1.0);
  EXPECT_EQ(out.status, FinalizeStatus::Lost);
  EXPECT_FALSE(out.corrected.has_value());
  EXPECT_TRUE(w.get(id).low_confidence);
  EXPECT_TRUE(w.get(id).obb.center.isApprox(predicted.center, 1e-12));
  for (const Vec3& p : w.get(id).cloud) EXPECT_TRUE(w.get(id).obb.contains(p, kCloudMargin));
  EXPECT_THROW(finalize_interaction(w, 99, predicted, {}, 1.0), std::out_of_range);
}

TEST(ScanUpdate, NewClusterBecomesNewObject) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb a = box_on(s, 2, 0.3);
  const Obb b = box_on(s, 4, 0.8);
  w.insert_object(surface_points(a), a);
  const std::vector<Cluster> clusters = {cluster_of(a, w), cluster_of(b, w)};
  const ScanUpdate up = update_world_from_scan(w, clusters, 2.0);
  EXPECT_EQ(up.matches.size(), 1u);
  ASSERT_EQ(up.new_ids.size(), 1u);
  EXPECT_EQ(w.objects().size(), 2u);
  EXPECT_LT((w.get(up.new_ids[0]).obb.center - b.center).norm(), 0.01);
  EXPECT_FALSE(w.get(up.new_ids[0]).movability.primitives.empty());
}

TEST(ScanUpdate, PartialViewInsideKnownObjectIsAbsorbed) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb a = box_on(s, 2, 0.4, Vec3(0.4, 0.2, 0.2));
  const int id = w.insert_object(surface_points(a), a);
  // Only a thin slice at the right end is seen; too small to match by IoU.
  const Obb part{a.center + scenes::step_dir(s) * 0.17, Vec3(0.03, 0.1, 0.1), a.yaw};
  std::vector<Vec3> pts;
  for (const Vec3& p : surface_points(a))
    if (part.contains(p, 1e-9)) pts.push_back(p);
  const std::vector<Cluster> clusters = {fit_resting_cluster(pts, w)};
  const ScanUpdate up = update_world_from_scan(w, clusters, 2.0);
  EXPECT_TRUE(up.new_ids.empty());
  EXPECT_EQ(up.absorbed, std::vector<int>{id});
  EXPECT_EQ(w.objects().size(), 1u);
}
