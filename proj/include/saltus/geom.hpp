#pragma once

#include <Eigen/Dense>
#include <vector>

namespace saltus {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion, scalar-first (w, x, y, z), canonicalized to w >= 0.
///
/// Canonical sign removes the double-cover ambiguity so that
/// 2*acos(w) is always the rotation angle in [0, pi].
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat identity() { return {}; }

  /// Rotation of `angle` radians about unit axis.
  static Quat from_axis_angle(const Vec3& axis, double angle);

  /// Exponential map of a rotation vector (angle * axis).
  static Quat exp_map(const Vec3& rotvec);

  double norm() const;
  Quat normalized() const;

  /// Flips sign so w >= 0. Rotation is unchanged.
  Quat canonical() const;

  Quat conjugate() const { return {w, -x, -y, -z}; }

  Vec3 vec() const { return {x, y, z}; }

  /// Body-to-parent rotation matrix.
  Mat3 rotation() const;

  /// Rotate a vector by this quaternion.
  Vec3 rotate(const Vec3& v) const;

  bool is_finite() const;
};

/// Hamilton product a ⊗ b (no canonicalization).
Quat quat_mul(const Quat& a, const Quat& b);

/// Error quaternion conj(q_ref) ⊗ q_body, unit and canonical.
/// Throws std::invalid_argument on non-finite input.
Quat quat_error(const Quat& q_ref, const Quat& q_body);

/// Rotation angle 2*acos(w) of a canonical unit quaternion, in [0, pi].
/// Values of |w| beyond 1 are clamped within 1e-9, rejected beyond.
double quat_angle(const Quat& q);

/// Advance q by a constant body-frame angular velocity over dt using the
/// exact exponential map: q(t+dt) = q ⊗ exp(omega*dt/2).
Quat integrate_quat(const Quat& q, const Vec3& omega_body, double dt);

/// Angle between two orientations, ignoring quaternion sign.
double quat_distance(const Quat& a, const Quat& b);

/// Rigid-body inertia: mass, center of mass and rotational inertia about
/// the center of mass, all in one common frame.
struct Inertia {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 moment = Mat3::Zero();

  static Inertia point_mass(double mass, const Vec3& at);
  /// Solid cuboid with full side lengths (sx, sy, sz), axis-aligned, com at `at`.
  static Inertia cuboid(double mass, const Vec3& sides, const Vec3& at);
  /// Solid sphere.
  static Inertia sphere(double mass, double radius, const Vec3& at);
  /// Solid cylinder of length `len` along unit `axis`, com at `at`.
  static Inertia cylinder(double mass, double radius, double len,
                          const Vec3& axis, const Vec3& at);
  /// Thin rod between two endpoints (cylinder of given radius).
  static Inertia rod(double mass, double radius, const Vec3& a, const Vec3& b);
};

/// Pose of a part when composing inertias.
struct PartPose {
  Vec3 position = Vec3::Zero();   // part frame origin in composite frame
  Mat3 rotation = Mat3::Identity();
};

/// Composite inertia of several parts, about the composite center of mass.
/// Throws std::invalid_argument if the list is empty or total mass is zero.
Inertia compose_inertia(const std::vector<std::pair<Inertia, PartPose>>& parts);

/// Moment of a single body about an arbitrary reference point (parallel axis).
Mat3 moment_about_point(const Inertia& body, const Vec3& point);

/// Skew-symmetric cross-product matrix.
Mat3 skew(const Vec3& v);

}  // namespace saltus
