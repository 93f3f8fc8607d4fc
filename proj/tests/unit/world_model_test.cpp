#include "stairclear/world_model.hpp"

#include "scenes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
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

Obb cube_on(const Staircase& s, int step, double lateral, double side = 0.3) {
  Obb b;
  b.half_extents = Vec3::Constant(0.5 * side);
  b.yaw = s.yaw;
  b.center = s.to_world({lateral, (step - 0.5) * s.tread_depth,
                         s.tread_height(step) - s.origin.z() + 0.5 * side});
  return b;
}

}  // namespace

TEST(Obb, ContainsHonoursYawAndMargin) {
  Obb b{Vec3(1, 2, 0.5), Vec3(0.5, 0.1, 0.5), std::numbers::pi / 2};
  EXPECT_TRUE(b.contains(Vec3(1.0, 2.45, 0.5)));
  EXPECT_FALSE(b.contains(Vec3(1.45, 2.0, 0.5)));
  EXPECT_TRUE(b.contains(Vec3(1.12, 2.0, 0.5), 0.03));
}

TEST(Obb, PenetrationDepthSigns) {
  Obb a{Vec3::Zero(), Vec3::Constant(0.5), 0.0};
  Obb touching{Vec3(1.0, 0, 0), Vec3::Constant(0.5), 0.0};
  Obb apart{Vec3(1.2, 0, 0), Vec3::Constant(0.5), 0.0};
  Obb deep{Vec3(0.9, 0, 0), Vec3::Constant(0.5), 0.0};
  EXPECT_NEAR(penetration_depth(a, touching), 0.0, 1e-12);
  EXPECT_LT(penetration_depth(a, apart), 0.0);
  EXPECT_NEAR(penetration_depth(a, deep), 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(penetration_depth(a, deep), penetration_depth(deep, a));
}

TEST(Obb, PenetrationAgreesWithRotatedCopies) {
  // Rigidly rotating both boxes leaves their overlap unchanged.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    Obb a{Vec3(u(rng), u(rng), 0), Vec3(0.3 + 0.2 * u(rng), 0.3, 0.2), 0.3 * u(rng)};
    Obb b{Vec3(u(rng), u(rng), 0.1 * u(rng)), Vec3(0.2, 0.4, 0.2), 0.3 * u(rng)};
    const double yaw = 2.0 * u(rng);
    Obb ra{rotate_yaw(a.center, yaw), a.half_extents, a.yaw + yaw};
    Obb rb{rotate_yaw(b.center, yaw), b.half_extents, b.yaw + yaw};
    EXPECT_NEAR(penetration_depth(a, b), penetration_depth(ra, rb), 1e-9);
  }
}

TEST(SpatialHash, MatchesLinearScan) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts(600);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.3 * u(rng));
  // Cells both much smaller and larger than the query radius.
  for (double cell : {0.01, 0.07, 0.3}) {
    const SpatialHash index(pts, cell);
    std::vector<std::size_t> got;
    for (int i = 0; i < 100; ++i) {
      const Vec3 q(u(rng), u(rng), 0.3 * u(rng));
      const double r = 0.02 + 0.1 * std::abs(u(rng));
      index.radius_neighbors(q, r, got);
      std::vector<std::size_t> want;
      std::optional<std::size_t> nearest;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const double d = (pts[j] - q).norm();
        if (d <= r) {
          want.push_back(j);
          if (!nearest || d < (pts[*nearest] - q).norm()) nearest = j;
        }
      }
      EXPECT_EQ(got, want) << "cell " << cell;
      EXPECT_EQ(index.nearest(q, r), nearest) << "cell " << cell;
    }
  }
}

TEST(VoxelDownsample, IsIdempotentAndOrderPreserving) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 0.2);
  std::vector<Vec3> pts(2000);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const auto once = voxel_downsample(pts, 0.01);
  EXPECT_LT(once.size(), pts.size());
  EXPECT_EQ(voxel_downsample(once, 0.01), once);
  EXPECT_EQ(once.front(), pts.front());
}

TEST(WorldModel, InsertAssignsSequentialIds) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = cube_on(s, 2, 0.6);
  EXPECT_EQ(w.insert_object(scenes::corners(b), b), 0);
  EXPECT_EQ(w.objects().size(), 1u);
  EXPECT_EQ(w.insert_object(scenes::corners(cube_on(s, 3, 0.6)), cube_on(s, 3, 0.6)), 1);
  EXPECT_EQ(w.get(0).id, 0);
  EXPECT_EQ(w.get(1).id, 1);
  EXPECT_GT(w.next_id(), 1);
}

TEST(WorldModel, InsertKeepsCloudVerbatim) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = cube_on(s, 2, 0.6);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  std::vector<Vec3> cloud(50);
  for (auto& p : cloud) p = b.center + Vec3(u(rng), u(rng), u(rng));
  const int id = w.insert_object(cloud, b);
  EXPECT_EQ(w.get(id).cloud, cloud);
  EXPECT_TRUE(w.get(id).obb.half_extents.isApprox(Vec3::Constant(0.15)));
}

TEST(WorldModel, RejectsBadInserts) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  Obb b = cube_on(s, 2, 0.6);
  EXPECT_THROW(w.insert_object({}, b), std::invalid_argument);
  EXPECT_THROW(w.insert_object({b.center + Vec3(1, 0, 0)}, b), std::invalid_argument);
  b.yaw = 0.3;
  EXPECT_THROW(w.insert_object({b.center}, b), std::invalid_argument);
}

TEST(ClassifyBySize, LimitsAreInclusive) {
  const Vec3 limits(0.6, 0.6, 0.6);
  Obb b{Vec3::Zero(), Vec3::Constant(0.15), 0.0};
  EXPECT_EQ(classify_by_size(b, limits), MovabilityTag::PotentiallyMovable);
  b.half_extents = Vec3(0.35, 0.15, 0.15);
  EXPECT_EQ(classify_by_size(b, limits), MovabilityTag::Static);
  b.half_extents = Vec3::Constant(0.3);
  EXPECT_EQ(classify_by_size(b, limits), MovabilityTag::PotentiallyMovable);
}

TEST(WorldModel, OversizedObjectStartsStatic) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{}, Vec3(0.2, 0.2, 0.2));
  const Obb b = cube_on(s, 2, 0.6);
  const int id = w.insert_object(scenes::corners(b), b);
  EXPECT_TRUE(w.get(id).is_static());
}

TEST(WorldModel, MovabilityIsOneWay) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const Obb b = cube_on(s, 2, 0.6);
  const int id = w.insert_object(scenes::corners(b), b);
  MotionPrimitive p;
  p.object_id = id;
  p.path = {b.center, b.center + Vec3(0.02, 0, 0)};
  w.set_primitives(id, {p});
  EXPECT_EQ(w.get(id).movability.primitives.size(), 1u);

  w.set_movability(id, MovabilityTag::Static);
  EXPECT_TRUE(w.get(id).is_static());
  EXPECT_TRUE(w.get(id).movability.primitives.empty());
  EXPECT_NO_THROW(w.set_movability(id, MovabilityTag::Static));
  EXPECT_THROW(w.set_movability(id, MovabilityTag::PotentiallyMovable), std::logic_error);
  w.set_primitives(id, {p});
  EXPECT_TRUE(w.get(id).movability.primitives.empty());
  EXPECT_THROW(w.set_movability(42, MovabilityTag::Static), std::out_of_range);
}

TEST(WorldModel, SurfacesPerTreadPlusGround) {
  const Staircase s = five_steps();
  WorldModel w({s}, GroundPlane{});
  const auto surf = w.navigable_surfaces();
  ASSERT_EQ(surf.size(), 6u);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(surf[k - 1].height, k * 0.17, 1e-12);
    EXPECT_EQ(surf[k - 1].ref.step, k);
  }
  EXPECT_TRUE(surf.back().ref.on_ground());

  Staircase t = five_steps();
  t.id = 1;
  t.num_steps = 3;
  t.origin = Vec3(3, 0, 0);
  WorldModel two({s, t}, GroundPlane{});
  EXPECT_EQ(two.navigable_surfaces().size(), 5u + 3u + 1u);
}

TEST(Staircase, ValidateNamesField) {
  Staircase s = five_steps();
  s.tread_depth = -0.1;
  try {
    s.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("tread_depth"), std::string::npos);
  }
}

TEST(Staircase, FrameRoundTrip) {
  Staircase s = five_steps();
  s.yaw = 0.7;
  s.origin = Vec3(0.3, -1.0, 0.05);
  const Vec3 p(0.2, 0.4, 0.1);
  EXPECT_TRUE(s.to_stair(s.to_world(p)).isApprox(p, 1e-12));
  EXPECT_NEAR(s.step_axis().norm(), 1.0, 1e-15);
  EXPECT_NEAR(s.step_axis().dot(s.ascent_axis()), 0.0, 1e-15);
}
