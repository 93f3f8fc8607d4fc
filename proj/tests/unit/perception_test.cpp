#include "stairclear/perception.hpp"
#include "stairclear/sim.hpp"

#include "oracles.hpp"
#include "scenes.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace stairclear;

namespace {

Staircase stair(double yaw = 0.0) {
  Staircase s;
  s.num_steps = 5;
  s.tread_depth = 0.3;
  s.riser_height = 0.17;
  s.width = 1.2;
  s.yaw = yaw;
  return s;
}

std::vector<Vec3> blob(std::mt19937_64& rng, const Vec3& c, double r, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> out;
  while (static_cast<int>(out.size()) < n) {
    Vec3 d(u(rng), u(rng), u(rng));
    if (d.norm() <= 1.0) out.push_back(c + r * d);
  }
  return out;
}

Sim noise_free_sim(const scenes::Scene& sc) {
  SimParams p;
  p.sensor.noise_sigma = 0.0;
  p.sensor.hfov = 3.0;
  p.sensor.range = 10.0;
  p.drift = {0.0, 0.0};
  return Sim({sc.stair}, sc.ground, sc.objects, p, 1);
}

}  // namespace

TEST(SubtractSurfaces, RemovesTreadsRisersAndGround) {
  WorldModel w({stair()}, GroundPlane{});
  std::vector<Vec3> pts = {
      {0.5, 0.45, 0.34},   // tread 2
      {0.5, 0.30, 0.25},   // riser 2
      {-1.0, -1.0, 0.0},   // ground
      {0.5, 0.45, 0.50},   // floating above tread 2
  };
  const auto kept = subtract_surfaces(pts, w, 0.02);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0], pts[3]);
  EXPECT_THROW(subtract_surfaces(pts, w, 0.0), std::invalid_argument);
  EXPECT_TRUE(subtract_surfaces(std::vector<Vec3>{}, w).empty());
}

TEST(SubtractSurfaces, IsIdempotent) {
  scenes::Scene sc;
  sc.stair = stair(0.4);
  sc.ground.min = {-4, -4};
  sc.ground.max = {4, 4};
  SimParams p;
  Sim noisy({sc.stair}, sc.ground, {}, p, 3);
  const PointCloud cloud = noisy.render(noisy.survey_pose());
  WorldModel w({sc.stair}, sc.ground);
  const auto once = subtract_surfaces(cloud.points, w);
  EXPECT_EQ(subtract_surfaces(once, w), once);
}

TEST(Dbscan, SeparatedBlobsAndNoise) {
  std::mt19937_64 rng(1);
  auto a = blob(rng, Vec3::Zero(), 0.05, 30);
  auto b = blob(rng, Vec3(1, 0, 0), 0.05, 30);
  a.insert(a.end(), b.begin(), b.end());
  EXPECT_EQ(dbscan(a, 0.1, 5).size(), 2u);
  EXPECT_TRUE(dbscan(std::vector<Vec3>{Vec3::Zero()}, 0.1, 3).empty());
}

TEST(Dbscan, OutlierIsDropped) {
  std::mt19937_64 rng(2);
  auto pts = blob(rng, Vec3::Zero(), 0.1, 100);
  pts.push_back(Vec3(5, 0, 0));
  const auto c = dbscan(pts, 0.15, 5);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].size(), 100u);
  const auto truth = oracle::brute_dbscan(pts, 0.15, 5);
  EXPECT_TRUE(oracle::dbscan_agrees(pts, 0.15, truth, c));
}

TEST(Dbscan, MatchesBruteForceOnRandomClouds) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Vec3> pts;
    const int blobs = 1 + trial % 4;
    for (int k = 0; k < blobs; ++k) {
      auto b = blob(rng, Vec3(u(rng), u(rng), 0.2 * u(rng)), 0.05 + 0.1 * u(rng), 20 + trial);
      pts.insert(pts.end(), b.begin(), b.end());
    }
    for (int k = 0; k < 15; ++k) pts.emplace_back(u(rng), u(rng), u(rng));
    const double eps = 0.04 + 0.04 * u(rng);
    const std::size_t min_pts = 3 + trial % 6;
    const auto got = dbscan(pts, eps, min_pts);
    EXPECT_TRUE(oracle::dbscan_agrees(pts, eps, oracle::brute_dbscan(pts, eps, min_pts), got))
        << "trial " << trial;
  }
}

TEST(Dbscan, PartitionIgnoresInputOrder) {
  std::mt19937_64 rng(8);
  std::vector<Vec3> pts;
  for (int k = 0; k < 3; ++k) {
    auto b = blob(rng, Vec3(0.4 * k, 0, 0), 0.08, 40);
    pts.insert(pts.end(), b.begin(), b.end());
  }
  std::vector<std::size_t> perm(pts.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Vec3> shuffled;
  for (std::size_t i : perm) shuffled.push_back(pts[i]);

  auto canonical = [](const std::vector<std::vector<std::size_t>>& c,
                      const std::vector<std::size_t>* map) {
    std::vector<std::vector<std::size_t>> out;
    for (auto g : c) {
      if (map)
        for (auto& i : g) i = (*map)[i];
      std::sort(g.begin(), g.end());
      out.push_back(g);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  // Blobs are well separated, so no border point is ambiguous.
  EXPECT_EQ(canonical(dbscan(pts, 0.06, 4), nullptr),
            canonical(dbscan(shuffled, 0.06, 4), &perm));
}

TEST(FitStairAlignedObb, CubeCorners) {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const Obb a = fit_stair_aligned_obb(cube, 0.0);
  EXPECT_TRUE(a.center.isApprox(Vec3::Constant(0.5)));
  EXPECT_TRUE(a.half_extents.isApprox(Vec3::Constant(0.5)));

  const Obb b = fit_stair_aligned_obb(cube, std::numbers::pi / 4);
  EXPECT_NEAR(b.half_extents.x(), std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(b.half_extents.y(), std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(b.half_extents.z(), 0.5, 1e-12);
  for (const Vec3& p : cube) EXPECT_TRUE(b.contains(p, 1e-12));
}

TEST(FitStairAlignedObb, SinglePointAndEmpty) {
  const Obb b = fit_stair_aligned_obb(std::vector<Vec3>{Vec3(1, 2, 3)}, 0.2);
  EXPECT_TRUE(b.center.isApprox(Vec3(1, 2, 3)));
  EXPECT_EQ(b.half_extents, Vec3::Zero());
  EXPECT_THROW(fit_stair_aligned_obb(std::vector<Vec3>{}, 0.0), std::invalid_argument);
}

TEST(FitStairAlignedObb, VolumeIsTranslationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    std::vector<Vec3> pts(30), moved;
    for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    const Vec3 t(5 * u(rng), 5 * u(rng), u(rng));
    for (const auto& p : pts) moved.push_back(p + t);
    const double yaw = u(rng);
    EXPECT_NEAR(fit_stair_aligned_obb(pts, yaw).volume(), fit_stair_aligned_obb(moved, yaw).volume(),
                1e-9);
  }
}

TEST(Perceive, EmptyStaircaseGivesNothing) {
  scenes::Scene sc;
  sc.stair = stair();
  sc.ground.min = {-4, -4};
  sc.ground.max = {4, 4};
  Sim sim({sc.stair}, sc.ground, {}, SimParams{}, 5);
  WorldModel w({sc.stair}, sc.ground);
  EXPECT_TRUE(perceive(sim.render(sim.survey_pose()), w).empty());
}

TEST(Perceive, TwoBoxesOnDifferentSteps) {
  scenes::Scene sc;
  sc.stair = stair(0.2);
  sc.ground.min = {-4, -4};
  sc.ground.max = {4, 4};
  for (int step : {2, 4}) {
    ObjectTruth o;
    o.dims = Vec3(0.3, 0.2, 0.2);
    o.yaw = sc.stair.yaw;
    o.center = sc.stair.to_world({0.3 + 0.1 * step, (step - 0.5) * 0.3, step * 0.17 + 0.1});
    sc.objects.push_back(o);
  }
  Sim sim({sc.stair}, sc.ground, sc.objects, SimParams{}, 5);
  WorldModel w({sc.stair}, sc.ground);
  auto clusters = perceive(sim.render(sim.survey_pose()), w);
  ASSERT_EQ(clusters.size(), 2u);
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.support.step < b.support.step; });
  EXPECT_EQ(clusters[0].support.step, 2);
  EXPECT_EQ(clusters[1].support.step, 4);
  for (const auto& c : clusters) {
    EXPECT_EQ(c.obb.yaw, sc.stair.yaw);
    for (const Vec3& p : c.points) EXPECT_TRUE(c.obb.contains(p, 0.01));
  }
}

TEST(Perceive, HalfOccludedBoxStaysInsideTruth) {
  // Camera low and in front: only the front and top faces are seen.
  scenes::Scene sc;
  sc.stair = stair();
  sc.ground.min = {-4, -4};
  sc.ground.max = {4, 4};
  ObjectTruth o;
  o.dims = Vec3(0.3, 0.25, 0.25);
  o.center = Vec3(0.6, 0.45, 0.34 + 0.125);
  sc.objects.push_back(o);
  Sim sim = noise_free_sim(sc);
  WorldModel w({sc.stair}, sc.ground);
  Pose cam{Vec3(0.6, -0.6, 0.9), std::numbers::pi / 2};
  const auto clusters = perceive(sim.render(cam), w);
  ASSERT_EQ(clusters.size(), 1u);
  const Obb truth = o.box();
  for (const Vec3& c : scenes::corners(clusters[0].obb)) EXPECT_TRUE(truth.contains(c, 1e-6));
}

TEST(Perceive, NoiseFreeScenesRecoverEveryObject) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto sc = scenes::random_scene(rng, 3, 0.1);
    Sim sim = noise_free_sim(sc);
    WorldModel w({sc.stair}, sc.ground);
    const auto clusters = perceive(sim.render(sim.survey_pose()), w);
    ASSERT_EQ(clusters.size(), sc.objects.size()) << "scene " << i;
    for (const auto& o : sc.objects) {
      double best = 1e9;
      for (const auto& c : clusters) best = std::min(best, (c.obb.center - o.center).norm());
      EXPECT_LE(best, 0.02) << "scene " << i;
    }
  }
}

TEST(Xyz, RoundTrip) {
  std::vector<Vec3> pts = {{0.1, 0.2, 0.3}, {-1.5, 2.25, 1e-3}};
  std::stringstream ss;
  write_xyz(ss, pts);
  const auto back = read_xyz(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(back[1].isApprox(pts[1]));
  std::stringstream bad("1 2\n");
  EXPECT_THROW(read_xyz(bad), std::runtime_error);
}
