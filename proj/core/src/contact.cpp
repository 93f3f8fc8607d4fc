#include "stairclear/contact.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace stairclear {

namespace {

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 perp(const Vec2& a) { return {-a.y(), a.x()}; }

Vec3 absolute_angles(const Vec3& q) { return {q[0], q[0] + q[1], q[0] + q[1] + q[2]}; }

Vec2 unit(double th) { return {std::cos(th), std::sin(th)}; }

// COM positions of each link.
std::array<Vec2, 3> com_positions(const LegModel& m, const Vec3& q) {
  const auto p = joint_positions(m, q);
  const Vec3 th = absolute_angles(q);
  std::array<Vec2, 3> c;
  for (int i = 0; i < 3; ++i) c[i] = p[i] + m.com_offsets[i] * unit(th[i]);
  return c;
}

// Linear Jacobian of COM i; columns beyond i are zero.
Mat23 com_jacobian(const LegModel& m, const Vec3& q, int i) {
  const auto p = joint_positions(m, q);
  const auto c = com_positions(m, q);
  Mat23 J = Mat23::Zero();
  for (int j = 0; j <= i; ++j) J.col(j) = perp(Vec2(c[i] - p[j]));
  return J;
}

}  // namespace

void LegModel::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(link_lengths[i] > 0))
      throw std::invalid_argument("link_lengths[" + std::to_string(i) + "] must be > 0");
    if (!(link_masses[i] > 0))
      throw std::invalid_argument("link_masses[" + std::to_string(i) + "] must be > 0");
    if (!(link_inertias[i] >= 0))
      throw std::invalid_argument("link_inertias[" + std::to_string(i) + "] must be >= 0");
  }
  if (!std::isfinite(gravity)) throw std::invalid_argument("gravity must be finite");
}

std::array<Vec2, 4> joint_positions(const LegModel& m, const Vec3& q) {
  const Vec3 th = absolute_angles(q);
  std::array<Vec2, 4> p;
  p[0] = Vec2::Zero();
  for (int i = 0; i < 3; ++i) p[i + 1] = p[i] + m.link_lengths[i] * unit(th[i]);
  return p;
}

Vec2 foot_position(const LegModel& m, const Vec3& q) { return joint_positions(m, q)[3]; }

Mat23 foot_jacobian(const LegModel& m, const Vec3& q) {
  const auto p = joint_positions(m, q);
  Mat23 J;
  for (int j = 0; j < 3; ++j) J.col(j) = perp(Vec2(p[3] - p[j]));
  return J;
}

Vec3 inverse_dynamics(const LegModel& m, const Vec3& q, const Vec3& qd, const Vec3& qdd) {
  const Vec3 th = absolute_angles(q);
  // Forward pass. Gravity enters as an upward base acceleration.
  Vec2 a(0.0, m.gravity);
  double w = 0.0, alpha = 0.0;
  std::array<Vec2, 3> e, f_com;
  std::array<double, 3> alphas;
  for (int i = 0; i < 3; ++i) {
    w += qd[i];
    alpha += qdd[i];
    e[i] = unit(th[i]);
    const Vec2 n = perp(e[i]);
    const Vec2 a_com = a + alpha * m.com_offsets[i] * n - w * w * m.com_offsets[i] * e[i];
    f_com[i] = m.link_masses[i] * a_com;
    alphas[i] = alpha;
    a = a + alpha * m.link_lengths[i] * n - w * w * m.link_lengths[i] * e[i];
  }
  // Backward pass: force and moment transmitted through each joint.
  Vec2 f_next = Vec2::Zero();
  double n_next = 0.0;
  Vec3 tau;
  for (int i = 2; i >= 0; --i) {
    const double n_i = n_next + cross2(m.link_lengths[i] * e[i], f_next) +
                       cross2(m.com_offsets[i] * e[i], f_com[i]) + m.link_inertias[i] * alphas[i];
    f_next = f_next + f_com[i];
    n_next = n_i;
    tau[i] = n_i;
  }
  return tau;
}

Mat3 mass_matrix(const LegModel& m, const Vec3& q) {
  Mat3 M = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    const Mat23 J = com_jacobian(m, q, i);
    M += m.link_masses[i] * J.transpose() * J;
    Vec3 Jw = Vec3::Zero();
    for (int j = 0; j <= i; ++j) Jw[j] = 1.0;
    M += m.link_inertias[i] * Jw * Jw.transpose();
  }
  return M;
}

Vec3 coriolis_torques(const LegModel& m, const Vec3& q, const Vec3& qd) {
  const Vec3 th = absolute_angles(q);
  Vec3 tau = Vec3::Zero();
  Vec2 a_joint = Vec2::Zero();
  double w = 0.0;
  for (int i = 0; i < 3; ++i) {
    w += qd[i];
    const Vec2 e = unit(th[i]);
    const Vec2 a_com = a_joint - w * w * m.com_offsets[i] * e;
    tau += m.link_masses[i] * com_jacobian(m, q, i).transpose() * a_com;
    a_joint -= w * w * m.link_lengths[i] * e;
  }
  return tau;
}

Vec3 gravity_torques(const LegModel& m, const Vec3& q) {
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < 3; ++i)
    g += m.link_masses[i] * m.gravity * com_jacobian(m, q, i).row(1).transpose();
  return g;
}

double kinetic_energy(const LegModel& m, const Vec3& q, const Vec3& qd) {
  return 0.5 * qd.dot(mass_matrix(m, q) * qd);
}

double potential_energy(const LegModel& m, const Vec3& q) {
  const auto c = com_positions(m, q);
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += m.link_masses[i] * m.gravity * c[i].y();
  return v;
}

Vec3 external_torques(const LegModel& m, const Vec3& q, const Vec2& f) {
  return foot_jacobian(m, q).transpose() * f;
}

Vec3 residual(const Vec3& tau_measured, const LegModel& m, const Vec3& q, const Vec3& qd,
              const Vec3& qdd) {
  return tau_measured - inverse_dynamics(m, q, qd, qdd);
}

Vec3 forward_dynamics(const LegModel& m, const Vec3& q, const Vec3& qd, const Vec3& tau) {
  const Vec3 bias = inverse_dynamics(m, q, qd, Vec3::Zero());
  return mass_matrix(m, q).ldlt().solve(tau - bias);
}

Vec3 solve_ik(const LegModel& m, const Vec2& target, const Vec3& q_init, int max_iter,
              double damping) {
  Vec3 q = q_init;
  const double lambda2 = damping * damping;
  for (int it = 0; it < max_iter; ++it) {
    const Vec2 err = target - foot_position(m, q);
    if (err.norm() < 1e-10) break;
    const Mat23 J = foot_jacobian(m, q);
    const Eigen::Matrix2d A = J * J.transpose() + lambda2 * Eigen::Matrix2d::Identity();
    q += J.transpose() * A.ldlt().solve(err);
  }
  return q;
}

ContactDetector::ContactDetector(double threshold, double sustain)
    : threshold_(threshold), sustain_(sustain) {
  if (!(threshold > 0)) throw std::invalid_argument("detector threshold must be > 0");
  if (!(sustain > 0)) throw std::invalid_argument("detector sustain must be > 0");
}

bool ContactDetector::detect(const Vec3& r, double t) { return detect_norm(r.norm(), t); }

bool ContactDetector::detect_norm(double norm, double t) {
  if (last_t_ && t < *last_t_)
    throw std::invalid_argument("ContactDetector: time went backwards");
  last_t_ = t;
  if (!(norm > threshold_)) {
    above_since_.reset();
    return false;
  }
  if (!above_since_) above_since_ = t;
  // Small slack so a window of n ticks of dt compares equal to n*dt.
  return t - *above_since_ >= sustain_ - 1e-9;
}

void ContactDetector::reset() {
  last_t_.reset();
  above_since_.reset();
}

}  // namespace stairclear
