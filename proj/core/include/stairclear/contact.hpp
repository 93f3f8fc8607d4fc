#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>

namespace stairclear {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Planar 3R leg moving in the lateral-vertical plane (u, w), w up.
/// Joint angles are relative; link i has absolute angle q_0 + ... + q_i.
/// Links carry a point mass at `com_offsets` plus a rotational inertia.
struct LegModel {
  Vec3 link_lengths{0.11, 0.32, 0.33};
  Vec3 link_masses{2.5, 1.5, 0.5};
  Vec3 com_offsets{0.055, 0.16, 0.165};
  /// About each link's COM (kg m^2).
  Vec3 link_inertias{0.0025, 0.0128, 0.0045};
  double gravity = 9.81;

  /// Throws std::invalid_argument on non-positive lengths or masses.
  void validate() const;
};

struct LegState {
  Vec3 q = Vec3::Zero();
  Vec3 qd = Vec3::Zero();
  Vec3 qdd = Vec3::Zero();
  Vec3 tau_measured = Vec3::Zero();
};

/// Joint positions p_0 (hip, origin) .. p_3 (foot) in the leg plane.
std::array<Vec2, 4> joint_positions(const LegModel& model, const Vec3& q);
Vec2 foot_position(const LegModel& model, const Vec3& q);
/// Linear foot Jacobian: column j is z x (p_foot - p_j).
Mat23 foot_jacobian(const LegModel& model, const Vec3& q);

/// Recursive Newton-Euler: M(q) qdd + C(q, qd) qd + G(q).
Vec3 inverse_dynamics(const LegModel& model, const Vec3& q, const Vec3& qd, const Vec3& qdd);

Mat3 mass_matrix(const LegModel& model, const Vec3& q);
/// Velocity product C(q, qd) qd.
Vec3 coriolis_torques(const LegModel& model, const Vec3& q, const Vec3& qd);
Vec3 gravity_torques(const LegModel& model, const Vec3& q);
double kinetic_energy(const LegModel& model, const Vec3& q, const Vec3& qd);
double potential_energy(const LegModel& model, const Vec3& q);

/// Joint torques that balance a force `f` exerted by the foot on the environment.
Vec3 external_torques(const LegModel& model, const Vec3& q, const Vec2& f);

/// tau_measured - tau_model.
Vec3 residual(const Vec3& tau_measured, const LegModel& model, const Vec3& q, const Vec3& qd,
              const Vec3& qdd);

/// Forward dynamics for free motion under `tau`.
Vec3 forward_dynamics(const LegModel& model, const Vec3& q, const Vec3& qd, const Vec3& tau);

/// Damped least-squares IK for the foot, warm-started from `q_init`.
Vec3 solve_ik(const LegModel& model, const Vec2& target, const Vec3& q_init,
              int max_iter = 50, double damping = 1e-2);

/// Fires once the residual norm has stayed strictly above `threshold` for at
/// least `sustain` seconds. Any sample at or below the threshold resets it.
class ContactDetector {
 public:
  explicit ContactDetector(double threshold = 4.0, double sustain = 0.1);

  /// Throws std::invalid_argument if `t` is earlier than the previous call.
  bool detect(const Vec3& residual, double t);
  bool detect_norm(double norm, double t);
  void reset();

  double threshold() const { return threshold_; }
  double sustain() const { return sustain_; }
  std::optional<double> above_since() const { return above_since_; }

 private:
  double threshold_;
  double sustain_;
  std::optional<double> last_t_;
  std::optional<double> above_since_;
};

}  // namespace stairclear
