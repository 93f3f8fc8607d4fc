#include "stairclear/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stairclear {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Ground-truth geometry may touch but never overlap by more than this.
constexpr double kTruthPenetration = 5e-4;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

Vec2 heading_vec(double h) { return {std::cos(h), std::sin(h)}; }
Vec2 left_vec(double h) { return {-std::sin(h), std::cos(h)}; }

// Emits points on the rectangle c + a*u + b*v, |a| <= hu, |b| <= hv.
template <class F>
void sample_rect(const Vec3& c, const Vec3& u, const Vec3& v, double hu, double hv,
                 double spacing, F&& emit) {
  const int nu = std::max(1, static_cast<int>(std::ceil(2.0 * hu / spacing)));
  const int nv = std::max(1, static_cast<int>(std::ceil(2.0 * hv / spacing)));
  for (int i = 0; i <= nu; ++i)
    for (int j = 0; j <= nv; ++j)
      emit(Vec3(c + (-hu + 2.0 * hu * i / nu) * u + (-hv + 2.0 * hv * j / nv) * v));
}

}  // namespace

void ObjectTruth::validate() const {
  for (int i = 0; i < 3; ++i)
    if (!(dims[i] > 0)) throw std::invalid_argument("object '" + name + "': dims must be > 0");
  if (shape == Shape::Cylinder && dims.x() != dims.y())
    throw std::invalid_argument("object '" + name + "': cylinder needs equal x and y dims");
  if (!(mass > 0)) throw std::invalid_argument("object '" + name + "': mass must be > 0");
  if (slip.probability < 0 || slip.probability > 1)
    throw std::invalid_argument("object '" + name + "': slip probability must be in [0, 1]");
  if (slip.fraction_min < 0 || slip.fraction_max > 1 || slip.fraction_min > slip.fraction_max)
    throw std::invalid_argument("object '" + name + "': slip fractions must satisfy 0 <= min <= max <= 1");
  for (double f : slip.schedule)
    if (f < 0 || f > 1)
      throw std::invalid_argument("object '" + name + "': slip schedule entries must be in [0, 1]");
  if (!(friction_min > 0) || friction_min > friction_max)
    throw std::invalid_argument("object '" + name + "': friction range must satisfy 0 < min <= max");
  if (!(force_scale > 0))
    throw std::invalid_argument("object '" + name + "': force_scale must be > 0");
}

void SensorModel::validate() const {
  if (!(hfov > 0 && hfov < kPi)) throw std::invalid_argument("sensor hfov must be in (0, pi)");
  if (!(range > 0)) throw std::invalid_argument("sensor range must be > 0");
  if (!(noise_sigma >= 0)) throw std::invalid_argument("sensor noise must be >= 0");
  if (!(object_spacing > 0) || !(surface_spacing > 0))
    throw std::invalid_argument("sensor spacing must be > 0");
}

const char* to_string(Leg leg) { return leg == Leg::FrontLeft ? "front_left" : "front_right"; }

Vec3 hip_position(const RobotPose& base, Leg leg, const RobotGeometry& geo) {
  const Vec2 f = heading_vec(base.heading), l = left_vec(base.heading);
  const double side = leg == Leg::FrontLeft ? 1.0 : -1.0;
  const Vec2 xy = base.position.head<2>() + geo.hip_forward * f + side * geo.hip_lateral * l;
  return {xy.x(), xy.y(), base.position.z() + geo.hip_height};
}

Pose camera_pose(const RobotPose& base, double camera_height, const RobotGeometry& geo) {
  const Vec2 xy = base.position.head<2>() + geo.camera_forward * heading_vec(base.heading);
  return Pose{Vec3(xy.x(), xy.y(), base.position.z() + camera_height), base.heading};
}

Sim::Sim(std::vector<Staircase> staircases, GroundPlane ground, std::vector<ObjectTruth> objects,
         SimParams params, std::uint64_t seed)
    : staircases_(std::move(staircases)),
      ground_(ground),
      params_(std::move(params)),
      seed_(seed),
      noise_rng_(make_stream(seed, 1)),
      drift_rng_(make_stream(seed, 2)),
      slip_rng_(make_stream(seed, 3)),
      torque_rng_(make_stream(seed, 4)) {
  if (staircases_.empty()) throw std::invalid_argument("Sim: at least one staircase is required");
  for (const auto& s : staircases_) s.validate();
  ground_.validate();
  params_.sensor.validate();
  params_.leg.validate();
  if (!(params_.dt > 0)) throw std::invalid_argument("Sim: dt must be > 0");
  surfaces_ = empty_world().navigable_surfaces();
  for (auto& t : objects) {
    t.validate();
    ObjectState o;
    o.movable = t.movable.value_or(t.mass <= params_.capability_mass);
    o.obb = t.box();
    o.truth = std::move(t);
    objects_.push_back(std::move(o));
  }
  attempts_.assign(objects_.size(), 0);
  budget_.assign(objects_.size(), std::numeric_limits<double>::infinity());
  travelled_.assign(objects_.size(), 0.0);
  friction_.resize(objects_.size());
  for (std::size_t i = 0; i < objects_.size(); ++i) friction_[i] = objects_[i].truth.friction_min;
}

WorldModel Sim::empty_world(Vec3 size_limits) const {
  return WorldModel(staircases_, ground_, size_limits);
}

Pose Sim::survey_pose() const {
  const Staircase& s = staircases_.front();
  const Vec2 front = s.origin.head<2>() + 0.5 * s.width * s.step_axis() -
                     params_.sensor.survey_distance * s.ascent_axis();
  const Vec2 a = s.ascent_axis();
  return Pose{Vec3(front.x(), front.y(), ground_.height + params_.sensor.survey_height),
              std::atan2(a.y(), a.x())};
}

double Sim::surface_height_below(const Vec2& xy, double z) const {
  const auto s = surface_below(surfaces_, xy, z, 0.02);
  return s ? s->height : ground_.height;
}

Vec3 Sim::to_true(const Vec3& b) const {
  const double dyaw = true_.heading - believed_.heading;
  Vec3 rel = b - believed_.position;
  rel = rotate_yaw(rel, dyaw);
  return true_.position + rel;
}

Vec3 Sim::to_believed(const Vec3& a) const {
  const double dyaw = true_.heading - believed_.heading;
  Vec3 rel = a - true_.position;
  rel = rotate_yaw(rel, -dyaw);
  return believed_.position + rel;
}

Vec3 Sim::place_robot(const RobotPose& believed, Leg leg) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double dx = params_.drift.sigma_xy * n01(drift_rng_);
  const double dy = params_.drift.sigma_xy * n01(drift_rng_);
  const double dyaw = params_.drift.sigma_yaw * n01(drift_rng_);
  believed_ = believed;
  true_ = believed;
  true_.position += Vec3(dx, dy, 0.0);
  true_.heading += dyaw;
  leg_ = leg;
  const Vec3 rest = foot_rest();
  foot_ = to_true(rest);
  leg_valid_ = false;
  interaction_axis_.reset();
  return rest;
}

Vec3 Sim::foot_rest() const {
  const Vec3 hip = hip_position(believed_, leg_, geometry_);
  const double h = surface_height_below(hip.head<2>(), hip.z());
  return {hip.x(), hip.y(), h + geometry_.foot_rest_height};
}

void Sim::begin_attempt(double commanded_length) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const ObjectTruth& t = objects_[i].truth;
    const std::size_t a = static_cast<std::size_t>(attempts_[i]++);
    const double r_slip = u01(slip_rng_), r_frac = u01(slip_rng_), r_mu = u01(slip_rng_);
    double fraction = 1.0;
    bool slips = false;
    if (a < t.slip.schedule.size()) {
      fraction = t.slip.schedule[a];
      slips = fraction < 1.0;
    } else if (r_slip < t.slip.probability) {
      fraction = t.slip.fraction_min + (t.slip.fraction_max - t.slip.fraction_min) * r_frac;
      slips = true;
    }
    budget_[i] = slips ? fraction * commanded_length : std::numeric_limits<double>::infinity();
    travelled_[i] = 0.0;
    friction_[i] = t.friction_min + (t.friction_max - t.friction_min) * r_mu;
  }
}

void Sim::set_interaction(std::optional<Vec3> axis) {
  if (axis) {
    Vec3 a = rotate_yaw(*axis, true_.heading - believed_.heading);
    a.z() = 0.0;
    interaction_axis_ = a.normalized();
  } else {
    interaction_axis_.reset();
  }
}

bool Sim::object_collides(std::size_t idx, const Obb& box) const {
  for (const auto& s : staircases_)
    for (const Obb& solid : s.solids())
      if (penetration_depth(box, solid) > kTruthPenetration) return true;
  for (std::size_t j = 0; j < objects_.size(); ++j)
    if (j != idx && penetration_depth(box, objects_[j].obb) > kTruthPenetration) return true;
  return false;
}

double Sim::free_travel(std::size_t idx, const Vec3& axis, double travel) const {
  const Obb& box = objects_[idx].obb;
  if (!object_collides(idx, box.translated(axis * travel))) return travel;
  double lo = 0.0, hi = travel;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (object_collides(idx, box.translated(axis * mid))) hi = mid;
    else lo = mid;
  }
  return lo;
}

void Sim::settle(std::size_t idx) {
  ObjectState& o = objects_[idx];
  const double bottom = o.obb.bottom();
  const double h = surface_height_below(o.obb.center.head<2>(), bottom);
  if (h >= bottom - 1e-9) return;
  Obb dropped = o.obb;
  dropped.center.z() = h + dropped.half_extents.z();
  // Slide clear of the step it fell off, away from the staircase.
  if (object_collides(idx, dropped) && interaction_axis_) {
    for (int k = 1; k <= 200 && object_collides(idx, dropped); ++k)
      dropped = dropped.translated(*interaction_axis_ * 0.005);
  }
  o.obb = dropped;
  o.truth.center = dropped.center;
}

LegState Sim::leg_state(const Vec3& foot) {
  const Vec3 hip = hip_position(true_, leg_, geometry_);
  const Vec2 l = left_vec(true_.heading);
  const Vec2 target((foot - hip).head<2>().dot(l), foot.z() - hip.z());
  const Vec3 q_seed = leg_valid_ ? q_prev_ : Vec3(-1.2, 0.9, 0.6);
  LegState st;
  st.q = solve_ik(params_.leg, target, q_seed);
  if (leg_valid_) {
    st.qd = (st.q - q_prev_) / params_.dt;
    st.qdd = (st.qd - qd_prev_) / params_.dt;
  }
  q_prev_ = st.q;
  qd_prev_ = st.qd;
  leg_valid_ = true;
  return st;
}

Vec3 Sim::measured_torques(const Vec3& q, const Vec3& qd, const Vec3& qdd, const Vec2& f) {
  Vec3 tau = inverse_dynamics(params_.leg, q, qd, qdd) + external_torques(params_.leg, q, f);
  if (params_.torque_noise > 0) {
    std::normal_distribution<double> n(0.0, params_.torque_noise);
    for (int i = 0; i < 3; ++i) tau[i] += n(torque_rng_);
  }
  return tau;
}

FootFeedback Sim::step_foot(const Vec3& command, double max_step) {
  const Vec3 a = foot_;
  Vec3 delta = to_true(command) - a;
  if (delta.norm() > max_step) delta *= max_step / delta.norm();
  Vec3 b = a + delta;

  FootFeedback fb;
  double force = 0.0;
  Vec3 force_dir = Vec3::Zero();
  if (interaction_axis_) {
    const Vec3 axis = *interaction_axis_;
    const Vec3 perp(-axis.y(), axis.x(), 0.0);
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      ObjectState& o = objects_[i];
      const Vec3 la = rotate_yaw(axis, -o.obb.yaw), lp = rotate_yaw(perp, -o.obb.yaw);
      const double h_axis =
          std::abs(la.x()) * o.obb.half_extents.x() + std::abs(la.y()) * o.obb.half_extents.y();
      const double h_perp =
          std::abs(lp.x()) * o.obb.half_extents.x() + std::abs(lp.y()) * o.obb.half_extents.y();
      const double fa = (a - o.obb.center).dot(axis) + h_axis;
      const double fbv = (b - o.obb.center).dot(axis) + h_axis;
      if (!(fa <= 1e-9 && fbv > 0.0)) continue;
      if (std::abs((b - o.obb.center).dot(perp)) > h_perp) continue;
      if (b.z() < o.obb.bottom() || b.z() > o.obb.top()) continue;

      const double want = fbv;
      const double cap = o.truth.force_scale * params_.force_cap;
      if (!o.movable) {
        b -= axis * want;
        fb.in_contact = fb.resisting = true;
        force = cap;
      } else {
        const double remaining = budget_[i] - travelled_[i];
        if (remaining <= 0.0) continue;  // slipped: the foot slides past
        const double travel = std::min(want, remaining);
        const double moved = free_travel(i, axis, travel);
        o.obb = o.obb.translated(axis * moved);
        o.truth.center = o.obb.center;
        travelled_[i] += moved;
        fb.in_contact = true;
        if (moved < travel - 1e-12) {
          b -= axis * (want - moved);
          fb.resisting = true;
          force = cap;
        } else {
          force = std::min(params_.force_cap,
                           o.truth.force_scale *
                               (params_.push_preload + friction_[i] * o.truth.mass * 9.81));
        }
        settle(i);
      }
      fb.contact_object = static_cast<int>(i);
      force_dir = axis;
      break;
    }
  }
  foot_ = b;

  fb.actual = foot_;
  fb.measured = to_believed(foot_);
  fb.leg = leg_state(foot_);
  const Vec3 f_world = force_dir * force;
  const Vec2 f_leg(f_world.head<2>().dot(left_vec(true_.heading)), f_world.z());
  fb.leg.tau_measured = measured_torques(fb.leg.q, fb.leg.qd, fb.leg.qdd, f_leg);
  time_ += params_.dt;
  return fb;
}

void Sim::sample_object(const ObjectState& o, const Vec3& cam, std::vector<Vec3>& out) {
  const double sp = params_.sensor.object_spacing;
  const Obb& box = o.obb;
  const Vec3 ex = rotate_yaw(Vec3(Vec3::UnitX()), box.yaw);
  const Vec3 ey = rotate_yaw(Vec3(Vec3::UnitY()), box.yaw);
  const Vec3 ez = Vec3::UnitZ();
  const Vec3 h = box.half_extents;
  auto emit = [&](const Vec3& p) { out.push_back(p); };

  // Top face is shared by both shapes' visibility rule.
  const Vec3 top_c = box.center + h.z() * ez;
  if (o.truth.shape == Shape::Box) {
    struct Face {
      Vec3 n, u, v;
      double hn, hu, hv;
    };
    const Face faces[] = {
        {ez, ex, ey, h.z(), h.x(), h.y()},   {-ez, ex, ey, h.z(), h.x(), h.y()},
        {ex, ey, ez, h.x(), h.y(), h.z()},   {-ex, ey, ez, h.x(), h.y(), h.z()},
        {ey, ex, ez, h.y(), h.x(), h.z()},   {-ey, ex, ez, h.y(), h.x(), h.z()},
    };
    for (const Face& f : faces) {
      const Vec3 c = box.center + f.n * f.hn;
      if (f.n.dot(cam - c) <= 0.0) continue;
      sample_rect(c, f.u, f.v, f.hu, f.hv, sp, emit);
    }
    return;
  }

  const double r = h.x();
  if (cam.z() > top_c.z()) {
    out.push_back(top_c);
    const int rings = std::max(1, static_cast<int>(std::ceil(r / sp)));
    for (int ring = 1; ring <= rings; ++ring) {
      const double rr = r * ring / rings;
      const int n = std::max(6, static_cast<int>(std::ceil(2 * kPi * rr / sp)));
      for (int k = 0; k < n; ++k) {
        const double th = 2 * kPi * k / n;
        out.push_back(top_c + rr * (std::cos(th) * ex + std::sin(th) * ey));
      }
    }
  }
  const int n_around = std::max(12, static_cast<int>(std::ceil(2 * kPi * r / sp)));
  const int n_up = std::max(1, static_cast<int>(std::ceil(2 * h.z() / sp)));
  for (int k = 0; k < n_around; ++k) {
    const double th = 2 * kPi * k / n_around;
    const Vec3 radial = std::cos(th) * ex + std::sin(th) * ey;
    const Vec3 mid = box.center + r * radial;
    if (radial.dot(cam - mid) <= 0.0) continue;
    for (int j = 0; j <= n_up; ++j) out.push_back(mid + (-h.z() + 2 * h.z() * j / n_up) * ez);
  }
}

PointCloud Sim::render(const Pose& camera, RenderMode mode) {
  const SensorModel& sensor = params_.sensor;
  const Vec3 cam = camera.position;
  std::vector<Vec3> raw;

  int hidden = -1;
  if (mode == RenderMode::Pushing && sensor.hide_target_when_pushing) {
    double best = 0.1;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      const Vec3 local = objects_[i].obb.to_local(foot_);
      const Vec3 excess = (local.cwiseAbs() - objects_[i].obb.half_extents).cwiseMax(0.0);
      if (excess.norm() <= best) {
        best = excess.norm();
        hidden = static_cast<int>(i);
      }
    }
  }
  for (std::size_t i = 0; i < objects_.size(); ++i)
    if (static_cast<int>(i) != hidden) sample_object(objects_[i], cam, raw);

  const double sp = sensor.surface_spacing;
  for (const Staircase& s : staircases_) {
    const Vec3 u = Vec3(s.step_axis().x(), s.step_axis().y(), 0.0);
    const Vec3 d = Vec3(s.ascent_axis().x(), s.ascent_axis().y(), 0.0);
    auto emit = [&](const Vec3& p) { raw.push_back(p); };
    for (int k = 1; k <= s.num_steps; ++k) {
      const double zt = s.tread_height(k);
      if (cam.z() > zt) {
        const Vec3 c = s.to_world(Vec3(0.5 * s.width, (k - 0.5) * s.tread_depth, k * s.riser_height));
        sample_rect(c, u, d, 0.5 * s.width, 0.5 * s.tread_depth, sp, emit);
      }
      const Vec3 rc = s.to_world(
          Vec3(0.5 * s.width, (k - 1) * s.tread_depth, (k - 0.5) * s.riser_height));
      if ((-d).dot(cam - rc) > 0.0)
        sample_rect(rc, u, Vec3::UnitZ(), 0.5 * s.width, 0.5 * s.riser_height, sp, emit);
    }
  }
  if (cam.z() > ground_.height) {
    const double x0 = std::max(ground_.min.x(), cam.x() - sensor.range);
    const double x1 = std::min(ground_.max.x(), cam.x() + sensor.range);
    const double y0 = std::max(ground_.min.y(), cam.y() - sensor.range);
    const double y1 = std::min(ground_.max.y(), cam.y() + sensor.range);
    const double gx0 = std::ceil(x0 / sp) * sp, gy0 = std::ceil(y0 / sp) * sp;
    for (double x = gx0; x <= x1; x += sp)
      for (double y = gy0; y <= y1; y += sp) {
        const Vec2 xy(x, y);
        bool under_stairs = false;
        for (const Staircase& s : staircases_)
          if (s.footprint().contains(xy, 0.0)) under_stairs = true;
        if (!under_stairs) raw.emplace_back(x, y, ground_.height);
      }
  }

  PointCloud cloud;
  cloud.sensor_pose = camera;
  const Vec2 fwd = heading_vec(camera.yaw);
  const double cos_half = std::cos(0.5 * sensor.hfov);
  std::normal_distribution<double> noise(0.0, sensor.noise_sigma);
  for (const Vec3& p : raw) {
    const Vec3 rel = p - cam;
    if (rel.norm() > sensor.range) continue;
    const Vec2 h = rel.head<2>();
    const double hn = h.norm();
    if (hn == 0.0 || h.dot(fwd) < cos_half * hn) continue;
    Vec3 q = p;
    if (sensor.noise_sigma > 0)
      for (int i = 0; i < 3; ++i) q[i] += noise(noise_rng_);
    cloud.points.push_back(q);
  }
  return cloud;
}

PointCloud Sim::render_robot(RenderMode mode) {
  return render(camera_pose(true_, params_.sensor.camera_height, geometry_), mode);
}

}  // namespace stairclear
