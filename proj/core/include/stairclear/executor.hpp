#pragma once

#include "stairclear/contact.hpp"
#include "stairclear/planning.hpp"
#include "stairclear/sim.hpp"
#include "stairclear/tracking.hpp"
#include "stairclear/world_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stairclear {

enum class PredictionMode { Feedback, OpenLoopBaseline };

const char* to_string(PredictionMode m);

struct ExecutorConfig {
  double partial_push_thresh = 0.10;
  double stall_window = 5.0;
  double stall_motion_eps = 0.01;
  int max_retries = 3;
  double foot_speed = 0.1;
  double standoff = 0.45;
  /// Height the foot is raised before a second return-planning attempt.
  double lift_height = 0.1;
  double contact_threshold = 4.0;
  double contact_sustain = 0.1;
  PredictionMode mode = PredictionMode::Feedback;
  PlanningParams planning;
  TrackingParams tracking;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ManipulationTask {
  int object_id = -1;
  PushDirection direction = PushDirection::Right;
  int retries_used = 0;
};

enum class OutcomeKind { Completed, ReclassifiedStatic, Retried, LostTrack, PlanFailure };

const char* to_string(OutcomeKind k);

/// Terminal result of one task. `retries` counts re-executions from alignment;
/// kind Retried means the retry budget ran out while the push was still partial.
struct PushOutcome {
  OutcomeKind kind = OutcomeKind::PlanFailure;
  int retries = 0;
  std::string message;
  /// Continuous stalled-contact time before reclassification (s).
  double stall_time = 0.0;
};

/// Push Right starts at the object's left face, so the left front leg is used.
Leg select_manipulation_leg(const TrackedObject& object, const MotionPrimitive& primitive);

/// Believed base pose `standoff` behind the object along the ascent direction,
/// facing up the stairs. Throws std::runtime_error if that spot is off the ground extent.
RobotPose align_pose(const TrackedObject& object, const WorldModel& world, double standoff);

struct TickRecord {
  double time = 0.0;
  Vec3 foot = Vec3::Zero();
  Phase phase = Phase::Approach;
  double residual_norm = 0.0;
  bool contact_detected = false;
  bool contact_truth = false;
};

/// One push attempt, emitted right after its visual update.
struct AttemptRecord {
  int task_index = 0;
  int object_id = -1;
  int attempt = 0;
  PushDirection direction = PushDirection::Right;
  bool prediction_active = false;
  /// Pose handed to association: the proprioceptive prediction, the last
  /// known pose, or the primitive end in baseline mode.
  Obb predicted;
  Vec3 expected_end = Vec3::Zero();
  FinalizeStatus status = FinalizeStatus::Lost;
  std::optional<Obb> corrected;
  double iou = 0.0;
  bool contact_detected = false;
  bool contact_truth = false;
  std::size_t ticks_in_contact = 0;
  std::size_t ticks_detected_in_contact = 0;
  bool stalled = false;
};

class Executor {
 public:
  Executor(ExecutorConfig config, Sim& sim, WorldModel& world);

  /// Initial scan from the sim's survey vantage.
  ScanUpdate survey();

  /// Runs one task through align, plan, push with contact monitoring, return,
  /// visual update and the partial-push check, retrying from alignment.
  PushOutcome execute_push(ManipulationTask& task);

  /// Executes tasks in order. Failures stay inside their task.
  std::vector<PushOutcome> run_task_plan(std::vector<ManipulationTask>& plan);

  std::function<void(const TickRecord&)> on_tick;
  std::function<void(const AttemptRecord&)> on_attempt;

  const ExecutorConfig& config() const { return config_; }

 private:
  enum class AttemptResult { Finished, Stalled };
  struct AttemptState;

  ScanUpdate perception_update();
  Vec3 free_point_above(const Vec3& p, const std::vector<int>& ignore) const;
  bool follow(const FootTrajectory& traj, AttemptState* st);
  void go_home(const Vec3& rest, const WorldModel& snapshot, std::optional<Vec3> retract_dir);

  ExecutorConfig config_;
  Sim& sim_;
  WorldModel& world_;
  ContactDetector detector_;
  int task_index_ = 0;
};

}  // namespace stairclear
