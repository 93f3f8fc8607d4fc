#include "stairclear/executor.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>

namespace stairclear {

const char* to_string(PredictionMode m) {
  return m == PredictionMode::Feedback ? "feedback" : "baseline";
}

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Completed: return "completed";
    case OutcomeKind::ReclassifiedStatic: return "reclassified_static";
    case OutcomeKind::Retried: return "retried";
    case OutcomeKind::LostTrack: return "lost_track";
    case OutcomeKind::PlanFailure: return "plan_failure";
  }
  return "?";
}

void ExecutorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  positive(partial_push_thresh, "partial_push_thresh");
  positive(stall_window, "stall_window");
  positive(stall_motion_eps, "stall_motion_eps");
  positive(foot_speed, "foot_speed");
  positive(standoff, "standoff");
  positive(lift_height, "lift_height");
  positive(contact_threshold, "contact_threshold");
  positive(contact_sustain, "contact_sustain");
  positive(planning.resolution, "planning.resolution");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
}

Leg select_manipulation_leg(const TrackedObject&, const MotionPrimitive& primitive) {
  return primitive.direction == PushDirection::Right ? Leg::FrontLeft : Leg::FrontRight;
}

RobotPose align_pose(const TrackedObject& object, const WorldModel& world, double standoff) {
  const Staircase& s = world.staircase_near(object.obb.center.head<2>());
  const Vec2 a = s.ascent_axis();
  const Vec2 xy = object.obb.center.head<2>() - standoff * a;
  if (!world.ground().rect().contains(xy, 0.0))
    throw std::runtime_error("align_pose: no valid standoff pose for object " +
                             std::to_string(object.id));
  const auto surfaces = world.navigable_surfaces();
  const auto under = surface_below(surfaces, xy, object.obb.bottom(), 0.02);
  RobotPose pose;
  pose.position = Vec3(xy.x(), xy.y(), under ? under->height : world.ground().height);
  pose.heading = std::atan2(a.y(), a.x());
  return pose;
}

namespace {

WorldModel with_object_at(const WorldModel& world, int id, const Obb& obb) {
  WorldModel copy = world;
  const TrackedObject& o = copy.get(id);
  const Vec3 shift = obb.center - o.obb.center;
  std::vector<Vec3> cloud;
  cloud.reserve(o.cloud.size());
  for (const Vec3& p : o.cloud) cloud.push_back(p + shift);
  const SupportRef support = o.support;
  const double t = o.last_update_time;
  copy.update_geometry(id, std::move(cloud), obb, support, t);
  return copy;
}

}  // namespace

struct Executor::AttemptState {
  int object_id = -1;
  MotionPrimitive primitive;
  PredictionState prediction;
  bool detected_any = false;
  bool truth_any = false;
  std::size_t ticks_in_contact = 0;
  std::size_t ticks_detected_in_contact = 0;
  std::deque<std::pair<double, Vec3>> stall_window;
  double contact_since = 0.0;
  double stall_time = 0.0;
  double progress_time = 0.0;
  Vec3 progress_pos = Vec3::Zero();
};

Executor::Executor(ExecutorConfig config, Sim& sim, WorldModel& world)
    : config_(std::move(config)),
      sim_(sim),
      world_(world),
      detector_(config_.contact_threshold, config_.contact_sustain) {
  config_.validate();
}

ScanUpdate Executor::perception_update() {
  const PointCloud cloud = sim_.render_robot(RenderMode::Navigation);
  const auto clusters = perceive(cloud, world_, config_.tracking.perception);
  return update_world_from_scan(world_, clusters, sim_.time(), config_.tracking);
}

ScanUpdate Executor::survey() {
  const PointCloud cloud = sim_.render(sim_.survey_pose(), RenderMode::Navigation);
  const auto clusters = perceive(cloud, world_, config_.tracking.perception);
  return update_world_from_scan(world_, clusters, sim_.time(), config_.tracking);
}

Vec3 Executor::free_point_above(const Vec3& p, const std::vector<int>& ignore) const {
  const double res = config_.planning.resolution;
  Aabb bounds{p - Vec3(0.1, 0.1, 0.1), p + Vec3(0.1, 0.1, 0.6)};
  const VoxelGrid grid = voxelize(world_, res, config_.planning.inflate, bounds, ignore);
  for (int k = 0; k * res <= 0.5; ++k) {
    const Vec3 q = p + Vec3(0.0, 0.0, k * res);
    const auto v = grid.locate(q);
    if (v && !grid.occupied(*v)) return q;
  }
  return p;
}

// Returns false if the push stalled.
bool Executor::follow(const FootTrajectory& traj, AttemptState* st) {
  const double dt = sim_.params().dt;
  const double step = config_.foot_speed * dt;
  std::size_t i = 0;
  while (i < traj.size()) {
    const Vec3& cmd = traj.waypoints[i];
    const Phase phase = traj.phases[i];
    const FootFeedback fb = sim_.step_foot(cmd, step);
    const double t = sim_.time();
    const Vec3 r = residual(fb.leg.tau_measured, sim_.params().leg, fb.leg.q, fb.leg.qd, fb.leg.qdd);
    const bool detected = detector_.detect(r, t);

    if (st && phase != Phase::Return) {
      if (fb.in_contact) {
        st->truth_any = true;
        ++st->ticks_in_contact;
        if (detected) ++st->ticks_detected_in_contact;
      }
      if (detected) {
        st->detected_any = true;
        if (config_.mode == PredictionMode::Feedback) {
          if (!st->prediction.active)
            st->prediction = begin_interaction(world_, st->object_id, st->primitive);
          st->prediction = update_prediction(st->prediction, fb.measured);
        }
        if (st->stall_window.empty()) st->contact_since = t;
        st->stall_window.emplace_back(t, fb.measured);
        const double W = config_.stall_window;
        while (st->stall_window.size() > 1 && t - st->stall_window[1].first >= W)
          st->stall_window.pop_front();
        if (t - st->stall_window.front().first >= W) {
          bool still = true;
          for (const auto& [ts, p] : st->stall_window)
            if ((p - fb.measured).norm() > config_.stall_motion_eps) still = false;
          if (still) {
            st->stall_time = t - st->contact_since;
            if (on_tick) on_tick({t, fb.measured, phase, r.norm(), detected, fb.in_contact});
            return false;
          }
        }
      } else {
        st->stall_window.clear();
      }
      // A foot that is held back without a detected contact gives up eventually.
      if ((fb.measured - st->progress_pos).norm() > config_.stall_motion_eps) {
        st->progress_pos = fb.measured;
        st->progress_time = t;
      } else if (t - st->progress_time > 2.0 * config_.stall_window) {
        if (on_tick) on_tick({t, fb.measured, phase, r.norm(), detected, fb.in_contact});
        return true;
      }
    }
    if (on_tick) on_tick({t, fb.measured, phase, r.norm(), detected, fb.in_contact});
    if ((fb.measured - cmd).norm() < 1e-7) ++i;
  }
  return true;
}

void Executor::go_home(const Vec3& rest, const WorldModel& snapshot,
                       std::optional<Vec3> retract_dir) {
  const Vec3 foot = sim_.measured_foot();
  FootTrajectory traj;
  try {
    traj = plan_return(foot, rest, snapshot, config_.planning, retract_dir);
  } catch (const PlanningError&) {
    FootTrajectory lift;
    lift.append(foot, Phase::Return);
    lift.append(foot + Vec3(0.0, 0.0, config_.lift_height), Phase::Return);
    follow(lift, nullptr);
    traj = plan_return(lift.waypoints.back(), rest, snapshot, config_.planning);
  }
  follow(traj, nullptr);
}

PushOutcome Executor::execute_push(ManipulationTask& task) {
  PushOutcome out;
  const TrackedObject* found = world_.find(task.object_id);
  if (!found) {
    out.message = "unknown object id " + std::to_string(task.object_id);
    return out;
  }
  if (found->is_static()) {
    out.message = "object " + std::to_string(task.object_id) + " is static";
    return out;
  }
  const int id = task.object_id;

  for (int attempt = 0;; ++attempt) {
    task.retries_used = attempt;
    out.retries = attempt;
    const Leg leg = task.direction == PushDirection::Right ? Leg::FrontLeft : Leg::FrontRight;
    try {
      sim_.place_robot(align_pose(world_.get(id), world_, config_.standoff), leg);
    } catch (const std::runtime_error& e) {
      out.kind = OutcomeKind::PlanFailure;
      out.message = e.what();
      return out;
    }
    perception_update();

    const MotionPrimitive* prim_ptr = world_.get(id).primitive(task.direction);
    if (!prim_ptr) {
      if (attempt == 0) {
        out.kind = OutcomeKind::PlanFailure;
        out.message = "no primitive in the requested direction";
      } else {
        out.kind = OutcomeKind::Completed;
      }
      return out;
    }
    AttemptState st;
    st.object_id = id;
    st.primitive = *prim_ptr;
    const MotionPrimitive& prim = st.primitive;
    const Vec3 rest = free_point_above(sim_.foot_rest(), {});

    FootTrajectory traj;
    try {
      traj = plan_foot_trajectory(rest, prim, world_, config_.planning);
    } catch (const PlanningError& e) {
      out.kind = OutcomeKind::PlanFailure;
      out.message = e.what();
      return out;
    }

    sim_.begin_attempt(prim.length());
    detector_.reset();
    st.progress_time = sim_.time();
    st.progress_pos = rest;
    sim_.set_interaction(prim.axis);
    const bool finished = follow(traj, &st);
    sim_.set_interaction(std::nullopt);

    AttemptRecord rec;
    rec.task_index = task_index_;
    rec.object_id = id;
    rec.attempt = attempt;
    rec.direction = task.direction;
    rec.expected_end = prim.expected_end();
    rec.contact_detected = st.detected_any;
    rec.contact_truth = st.truth_any;
    rec.ticks_in_contact = st.ticks_in_contact;
    rec.ticks_detected_in_contact = st.ticks_detected_in_contact;
    rec.prediction_active = st.prediction.active;

    if (!finished) {
      world_.set_movability(id, MovabilityTag::Static);
      rec.stalled = true;
      rec.predicted = world_.get(id).obb;
      try {
        go_home(rest, world_, -prim.axis);
      } catch (const PlanningError&) {
        // The foot stays where it is; the reclassification already happened.
      }
      if (on_attempt) on_attempt(rec);
      out.kind = OutcomeKind::ReclassifiedStatic;
      out.stall_time = st.stall_time;
      return out;
    }

    const TrackedObject& obj = world_.get(id);
    Obb estimate = obj.obb;
    if (config_.mode == PredictionMode::OpenLoopBaseline)
      estimate = obj.obb.translated(prim.expected_end() - prim.path.front());
    else if (st.prediction.active)
      estimate = st.prediction.predicted_obb;
    rec.predicted = estimate;

    try {
      go_home(rest, with_object_at(world_, id, estimate), -prim.axis);
    } catch (const PlanningError& e) {
      out.kind = OutcomeKind::PlanFailure;
      out.message = std::string("return: ") + e.what();
      return out;
    }

    const PointCloud cloud = sim_.render_robot(RenderMode::Navigation);
    const auto clusters = perceive(cloud, world_, config_.tracking.perception);
    const FinalizeOutcome fo =
        finalize_interaction(world_, id, estimate, clusters, sim_.time(), config_.tracking);
    rec.status = fo.status;
    rec.corrected = fo.corrected;
    rec.iou = fo.iou;
    if (on_attempt) on_attempt(rec);

    const bool lost = fo.status == FinalizeStatus::Lost;
    const double distance = (world_.get(id).obb.center - prim.expected_end()).norm();
    if (!lost && distance <= config_.partial_push_thresh) {
      out.kind = OutcomeKind::Completed;
      return out;
    }
    if (attempt >= config_.max_retries) {
      out.kind = lost ? OutcomeKind::LostTrack : OutcomeKind::Retried;
      out.message = lost ? "object not re-detected" : "push still partial after retries";
      return out;
    }
  }
}

std::vector<PushOutcome> Executor::run_task_plan(std::vector<ManipulationTask>& plan) {
  std::vector<PushOutcome> outcomes;
  outcomes.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    task_index_ = static_cast<int>(i);
    try {
      outcomes.push_back(execute_push(plan[i]));
    } catch (const std::exception& e) {
      PushOutcome failed;
      failed.kind = OutcomeKind::PlanFailure;
      failed.message = e.what();
      outcomes.push_back(std::move(failed));
    }
  }
  return outcomes;
}

}  // namespace stairclear
