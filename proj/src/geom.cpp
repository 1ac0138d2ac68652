#include "saltus/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace saltus {

namespace {
constexpr double kUnitTol = 1e-9;
}

Quat Quat::from_axis_angle(const Vec3& axis, double angle) {
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Quat{std::cos(half), s * axis.x(), s * axis.y(), s * axis.z()}.canonical();
}

Quat Quat::exp_map(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    // Second-order series keeps the update exact to machine precision here.
    const Vec3 h = 0.5 * rotvec;
    return Quat{1.0 - 0.5 * h.squaredNorm(), h.x(), h.y(), h.z()}.normalized();
  }
  return from_axis_angle(rotvec / angle, angle);
}

double Quat::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quat Quat::normalized() const {
  const double n = norm();
  if (n <= 0.0 || !std::isfinite(n)) {
    throw std::invalid_argument("Quat::normalized: zero or non-finite norm");
  }
  return Quat{w / n, x / n, y / n, z / n};
}

Quat Quat::canonical() const {
  if (w < 0.0) return {-w, -x, -y, -z};
  return *this;
}

Mat3 Quat::rotation() const {
  Mat3 r;
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  r << ww + xx - yy - zz, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), ww - xx + yy - zz, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), ww - xx - yy + zz;
  return r;
}

Vec3 Quat::rotate(const Vec3& v) const {
  const Vec3 qv = vec();
  const Vec3 t = 2.0 * qv.cross(v);
  return v + w * t + qv.cross(t);
}

bool Quat::is_finite() const {
  return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

Quat quat_mul(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quat quat_error(const Quat& q_ref, const Quat& q_body) {
  if (!q_ref.is_finite() || !q_body.is_finite()) {
    throw std::invalid_argument("quat_error: non-finite input");
  }
  return quat_mul(q_ref.conjugate(), q_body).normalized().canonical();
}

double quat_angle(const Quat& q) {
  double w = q.w;
  const double excess = std::abs(w) - 1.0;
  if (excess > kUnitTol) {
    throw std::invalid_argument("quat_angle: |w| exceeds 1 beyond tolerance");
  }
  w = std::clamp(w, -1.0, 1.0);
  return 2.0 * std::acos(w);
}

Quat integrate_quat(const Quat& q, const Vec3& omega_body, double dt) {
  if (!q.is_finite() || !omega_body.allFinite() || !std::isfinite(dt)) {
    throw std::invalid_argument("integrate_quat: non-finite input");
  }
  // Body-frame rate: increment multiplies on the right.
  return quat_mul(q, Quat::exp_map(omega_body * dt)).normalized().canonical();
}

double quat_distance(const Quat& a, const Quat& b) {
  return quat_angle(quat_error(a, b));
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Inertia Inertia::point_mass(double mass, const Vec3& at) {
  return {mass, at, Mat3::Zero()};
}

Inertia Inertia::cuboid(double mass, const Vec3& sides, const Vec3& at) {
  const double c = mass / 12.0;
  Mat3 m = Mat3::Zero();
  m(0, 0) = c * (sides.y() * sides.y() + sides.z() * sides.z());
  m(1, 1) = c * (sides.x() * sides.x() + sides.z() * sides.z());
  m(2, 2) = c * (sides.x() * sides.x() + sides.y() * sides.y());
  return {mass, at, m};
}

Inertia Inertia::sphere(double mass, double radius, const Vec3& at) {
  return {mass, at, 0.4 * mass * radius * radius * Mat3::Identity()};
}

Inertia Inertia::cylinder(double mass, double radius, double len,
                          const Vec3& axis, const Vec3& at) {
  const double i_ax = 0.5 * mass * radius * radius;
  const double i_perp = mass * (3.0 * radius * radius + len * len) / 12.0;
  const Vec3 u = axis.normalized();
  Mat3 m = i_perp * (Mat3::Identity() - u * u.transpose()) + i_ax * u * u.transpose();
  return {mass, at, m};
}

Inertia Inertia::rod(double mass, double radius, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len < 1e-12) return sphere(mass, radius, a);
  return cylinder(mass, radius, len, d / len, 0.5 * (a + b));
}

Mat3 moment_about_point(const Inertia& body, const Vec3& point) {
  const Vec3 d = body.com - point;
  return body.moment +
         body.mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
}

Inertia compose_inertia(const std::vector<std::pair<Inertia, PartPose>>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("compose_inertia: no parts");
  }
  double total_mass = 0.0;
  Vec3 weighted_com = Vec3::Zero();
  for (const auto& [inertia, pose] : parts) {
    const Vec3 com = pose.position + pose.rotation * inertia.com;
    total_mass += inertia.mass;
    weighted_com += inertia.mass * com;
  }
  if (total_mass <= 0.0) {
    throw std::invalid_argument("compose_inertia: zero total mass");
  }
  const Vec3 com = weighted_com / total_mass;

  Mat3 moment = Mat3::Zero();
  for (const auto& [inertia, pose] : parts) {
    const Vec3 part_com = pose.position + pose.rotation * inertia.com;
    const Mat3 rotated = pose.rotation * inertia.moment * pose.rotation.transpose();
    const Vec3 d = part_com - com;
    moment += rotated +
              inertia.mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  // Symmetrize away accumulation round-off.
  moment = 0.5 * (moment + moment.transpose()).eval();
  return {total_mass, com, moment};
}

}  // namespace saltus
