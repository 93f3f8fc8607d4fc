#pragma once

#include "stairclear/contact.hpp"
#include "stairclear/perception.hpp"
#include "stairclear/world_model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace stairclear {

enum class Shape { Box, Cylinder };

/// Scripted partial pushes. Each push attempt may stop the object after a
/// fraction of the commanded travel, after which the foot slides past.
struct SlipModel {
  double probability = 0.0;
  double fraction_min = 1.0;
  double fraction_max = 1.0;
  /// Explicit per-attempt fractions; overrides the random draw while entries remain.
  std::vector<double> schedule;
};

struct ObjectTruth {
  std::string name = "object";
  /// Class label used for per-class reporting.
  std::string category = "object";
  Shape shape = Shape::Box;
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;
  /// Full extents; for a cylinder x = y = diameter.
  Vec3 dims{0.3, 0.3, 0.3};
  double mass = 2.0;
  /// Defaults to mass <= capability mass.
  std::optional<bool> movable;
  SlipModel slip;
  double friction_min = 0.5;
  double friction_max = 0.5;
  /// Multiplies every contact force the object exerts on the foot.
  double force_scale = 1.0;

  Obb box() const { return Obb{center, 0.5 * dims, yaw}; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SensorModel {
  double hfov = 110.0 * 3.14159265358979323846 / 180.0;
  double range = 4.0;
  double noise_sigma = 0.005;
  double object_spacing = 0.01;
  double surface_spacing = 0.03;
  /// Camera height above the surface the robot stands on.
  double camera_height = 0.7;
  /// Camera height above the ground for the initial survey.
  double survey_height = 2.0;
  /// Survey position behind the first step, along the descent direction.
  double survey_distance = 1.0;
  bool hide_target_when_pushing = true;

  void validate() const;
};

struct DriftModel {
  double sigma_xy = 0.02;
  double sigma_yaw = 0.01;
};

struct SimParams {
  double dt = 0.01;
  double capability_mass = 8.0;
  /// Force the leg exerts against something it cannot move (N).
  double force_cap = 60.0;
  /// Contact preload of the foot controller while an object slides (N);
  /// the sliding force is force_scale * (preload + mu * m * g).
  double push_preload = 50.0;
  double torque_noise = 0.3;
  LegModel leg;
  DriftModel drift;
  SensorModel sensor;
};

enum class RenderMode { Navigation, Pushing };

/// Robot base pose. Heading is the facing direction.
struct RobotPose {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
};

enum class Leg { FrontLeft, FrontRight };

const char* to_string(Leg leg);

/// Fixed body geometry of the stub robot.
struct RobotGeometry {
  double hip_forward = 0.2;
  double hip_lateral = 0.1;
  double hip_height = 0.5;
  double camera_forward = 0.1;
  /// Rest height of a free foot above the surface under it.
  double foot_rest_height = 0.10;
};

Vec3 hip_position(const RobotPose& base, Leg leg, const RobotGeometry& geo = {});
Pose camera_pose(const RobotPose& base, double camera_height, const RobotGeometry& geo = {});

struct ObjectState {
  ObjectTruth truth;
  Obb obb;
  bool movable = true;
};

/// Everything the executor learns from one control tick.
struct FootFeedback {
  /// Foot position as the robot believes it (odometry frame).
  Vec3 measured = Vec3::Zero();
  /// True position, for logs only.
  Vec3 actual = Vec3::Zero();
  LegState leg;
  /// Ground truth contact (for recall metrics, never used in control).
  bool in_contact = false;
  bool resisting = false;
  int contact_object = -1;
};

/// Deterministic oracle of the physical world. Noise, drift and slip draw
/// from separate streams derived from the seed.
class Sim {
 public:
  Sim(std::vector<Staircase> staircases, GroundPlane ground, std::vector<ObjectTruth> objects,
      SimParams params, std::uint64_t seed);

  const std::vector<Staircase>& staircases() const { return staircases_; }
  const GroundPlane& ground() const { return ground_; }
  const std::vector<ObjectState>& objects() const { return objects_; }
  const SimParams& params() const { return params_; }
  double time() const { return time_; }

  /// World model seeded with the known stair geometry and no objects.
  WorldModel empty_world(Vec3 size_limits = kDefaultSizeLimits) const;

  /// Elevated vantage in front of the first staircase, facing up the stairs.
  Pose survey_pose() const;

  /// Samples visible faces of objects, treads, risers and ground.
  PointCloud render(const Pose& camera, RenderMode mode = RenderMode::Navigation);
  /// Render from the robot's true camera.
  PointCloud render_robot(RenderMode mode = RenderMode::Navigation);

  /// Places the robot at `believed` plus a fresh odometry drift sample and
  /// parks `leg` at its rest pose. Returns the believed foot rest position.
  Vec3 place_robot(const RobotPose& believed, Leg leg);
  const RobotPose& believed_base() const { return believed_; }
  const RobotPose& true_base() const { return true_; }
  /// Believed-frame rest position for the active leg.
  Vec3 foot_rest() const;
  /// Current foot position in the believed frame.
  Vec3 measured_foot() const { return to_believed(foot_); }
  /// Current foot position in the world.
  const Vec3& actual_foot() const { return foot_; }

  /// Starts a push attempt: draws each object's slip budget for a commanded
  /// travel of `commanded_length` and its friction coefficient.
  void begin_attempt(double commanded_length);
  /// Enables foot-object interaction along `axis` (believed frame); nullopt disables.
  void set_interaction(std::optional<Vec3> axis);

  /// Moves the foot toward `command` (believed frame) by at most `max_step`
  /// and advances the clock by dt.
  FootFeedback step_foot(const Vec3& command, double max_step);

  /// Torques the leg would measure at `state` with foot force `f` (leg plane).
  Vec3 measured_torques(const Vec3& q, const Vec3& qd, const Vec3& qdd, const Vec2& f);

  std::uint64_t seed() const { return seed_; }

 private:
  Vec3 to_true(const Vec3& believed) const;
  Vec3 to_believed(const Vec3& actual) const;
  double surface_height_below(const Vec2& xy, double z) const;
  bool object_collides(std::size_t idx, const Obb& box) const;
  double free_travel(std::size_t idx, const Vec3& axis, double travel) const;
  void settle(std::size_t idx);
  void sample_object(const ObjectState& o, const Vec3& cam, std::vector<Vec3>& out);
  LegState leg_state(const Vec3& foot_actual);

  std::vector<Staircase> staircases_;
  GroundPlane ground_;
  std::vector<Surface> surfaces_;
  std::vector<ObjectState> objects_;
  SimParams params_;
  RobotGeometry geometry_;
  std::uint64_t seed_;

  std::mt19937_64 noise_rng_;
  std::mt19937_64 drift_rng_;
  std::mt19937_64 slip_rng_;
  std::mt19937_64 torque_rng_;

  double time_ = 0.0;
  RobotPose believed_;
  RobotPose true_;
  Leg leg_ = Leg::FrontLeft;
  Vec3 foot_ = Vec3::Zero();
  std::optional<Vec3> interaction_axis_;
  std::vector<int> attempts_;
  std::vector<double> budget_;
  std::vector<double> travelled_;
  std::vector<double> friction_;

  Vec3 q_prev_ = Vec3::Zero();
  Vec3 qd_prev_ = Vec3::Zero();
  bool leg_valid_ = false;
};

}  // namespace stairclear
