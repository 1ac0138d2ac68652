#include "saltus/linkage.hpp"

#include <cmath>

namespace saltus {

namespace {
// Circle intersection degenerates below this knee separation.
constexpr double kDegenerateSeparation = 1e-9;
}

void LegGeometry::validate() const {
  if (l0 <= 0.0 || l1 <= 0.0 || l3 <= 0.0) {
    throw std::invalid_argument("LegGeometry: lengths must be positive");
  }
  if (l3 <= 0.5 * l0) {
    throw std::invalid_argument("LegGeometry: l3 must exceed l0/2");
  }
  if (spring_k < 0.0 || spring_rest < 0.0) {
    throw std::invalid_argument("LegGeometry: spring parameters must be >= 0");
  }
}

double LegGeometry::extended_depth() const {
  return l1 + std::sqrt(l3 * l3 - 0.25 * l0 * l0);
}

Vec2 motor1_position(const LegGeometry& g) { return {-0.5 * g.l0, 0.0}; }
Vec2 motor2_position(const LegGeometry& g) { return {0.5 * g.l0, 0.0}; }

Vec2 knee1_position(const LegGeometry& g, double theta1) {
  return motor1_position(g) + g.l1 * Vec2{-std::sin(theta1), std::cos(theta1)};
}

Vec2 knee2_position(const LegGeometry& g, double theta2) {
  return motor2_position(g) + g.l1 * Vec2{std::sin(theta2), std::cos(theta2)};
}

LegPose forward_kinematics(const LegGeometry& g, double theta1, double theta2) {
  if (!std::isfinite(theta1) || !std::isfinite(theta2)) {
    throw std::invalid_argument("forward_kinematics: non-finite angle");
  }
  LegPose pose;
  pose.theta1 = theta1;
  pose.theta2 = theta2;
  pose.knee1 = knee1_position(g, theta1);
  pose.knee2 = knee2_position(g, theta2);

  const Vec2 d = pose.knee2 - pose.knee1;
  const double dist = d.norm();
  if (dist < kDegenerateSeparation) {
    throw InfeasibleConfigError("forward_kinematics: coincident knees");
  }
  if (dist > 2.0 * g.l3) {
    throw InfeasibleConfigError("forward_kinematics: knee circles disjoint");
  }
  // Equal lower links: the paw sits on the perpendicular bisector of the
  // knee-knee segment, at the distal (larger-y) intersection.
  const Vec2 mid = 0.5 * (pose.knee1 + pose.knee2);
  const double h2 = g.l3 * g.l3 - 0.25 * dist * dist;
  const double h = std::sqrt(std::max(h2, 0.0));
  const Vec2 perp{-d.y() / dist, d.x() / dist};
  const Vec2 a = mid + h * perp;
  const Vec2 b = mid - h * perp;
  pose.paw = (a.y() >= b.y()) ? a : b;
  return pose;
}

LegPose inverse_kinematics(const LegGeometry& g, const Vec2& paw) {
  // Each knee is an intersection of the motor circle (radius l1) and the paw
  // circle (radius l3); the outward branch keeps the diamond open.
  const auto solve_knee = [&](const Vec2& motor, double branch_sign) {
    const Vec2 d = paw - motor;
    const double dist = d.norm();
    if (dist > g.l1 + g.l3 || dist < std::abs(g.l1 - g.l3) ||
        dist < kDegenerateSeparation) {
      throw InfeasibleConfigError("inverse_kinematics: paw out of reach");
    }
    const double a = (g.l1 * g.l1 - g.l3 * g.l3 + dist * dist) / (2.0 * dist);
    const double h = std::sqrt(std::max(g.l1 * g.l1 - a * a, 0.0));
    const Vec2 base = motor + a * d / dist;
    const Vec2 perp{-d.y() / dist, d.x() / dist};
    return Vec2(base + branch_sign * h * perp);
  };

  LegPose pose;
  pose.paw = paw;
  pose.knee1 = solve_knee(motor1_position(g), +1.0);
  pose.knee2 = solve_knee(motor2_position(g), -1.0);

  const Vec2 u1 = pose.knee1 - motor1_position(g);
  const Vec2 u2 = pose.knee2 - motor2_position(g);
  pose.theta1 = std::atan2(-u1.x(), u1.y());
  pose.theta2 = std::atan2(u2.x(), u2.y());
  return pose;
}

Mat2 jacobian(const LegGeometry& g, double theta1, double theta2) {
  const LegPose pose = forward_kinematics(g, theta1, theta2);
  const Vec2 r1 = pose.paw - pose.knee1;
  const Vec2 r2 = pose.paw - pose.knee2;

  // Differentiating the two closure constraints |paw - knee_i| = l3:
  //   r_i . (dpaw - dknee_i) = 0,
  // so A dpaw = diag(r_i . dknee_i/dtheta_i) dtheta with A = [r1^T; r2^T].
  Mat2 a;
  a.row(0) = r1.transpose();
  a.row(1) = r2.transpose();
  // det = l3^2 sin(angle at the paw); vanishes at the fold (knees coincide)
  // and at full stretch of the lower links.
  const double det = a.determinant();
  if (std::abs(det) < 1e-4 * g.l3 * g.l3) {
    throw SingularConfigError("jacobian: knees collinear with paw");
  }

  const Vec2 dk1{-g.l1 * std::cos(theta1), -g.l1 * std::sin(theta1)};
  const Vec2 dk2{g.l1 * std::cos(theta2), -g.l1 * std::sin(theta2)};
  Mat2 rhs = Mat2::Zero();
  rhs(0, 0) = r1.dot(dk1);
  rhs(1, 1) = r2.dot(dk2);
  return a.inverse() * rhs;
}

double knee_distance(const LegGeometry& g, double theta1, double theta2) {
  return (knee2_position(g, theta2) - knee1_position(g, theta1)).norm();
}

Vec2 spring_torque(const LegGeometry& g, double theta1, double theta2) {
  const Vec2 k1 = knee1_position(g, theta1);
  const Vec2 k2 = knee2_position(g, theta2);
  const Vec2 d = k1 - k2;
  const double dist = d.norm();
  if (dist <= g.spring_rest || dist < kDegenerateSeparation) {
    return Vec2::Zero();
  }
  const Vec2 u = d / dist;
  const Vec2 dk1{-g.l1 * std::cos(theta1), -g.l1 * std::sin(theta1)};
  const Vec2 dk2{g.l1 * std::cos(theta2), -g.l1 * std::sin(theta2)};
  const double tension = g.spring_k * (dist - g.spring_rest);
  // tau_i = -dE/dtheta_i with E = k/2 (d - rest)^2.
  return {-tension * u.dot(dk1), tension * u.dot(dk2)};
}

double spring_energy(const LegGeometry& g, double theta1, double theta2) {
  const double d = knee_distance(g, theta1, theta2);
  if (d <= g.spring_rest) return 0.0;
  const double stretch = d - g.spring_rest;
  return 0.5 * g.spring_k * stretch * stretch;
}

std::vector<WorkspaceSample> workspace_sample(const LegGeometry& g, double lo,
                                              double hi, int n) {
  if (n < 2 || hi <= lo) {
    throw std::invalid_argument("workspace_sample: bad grid");
  }
  std::vector<WorkspaceSample> samples;
  samples.reserve(static_cast<size_t>(n) * n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      WorkspaceSample s;
      s.theta1 = lo + i * step;
      s.theta2 = lo + j * step;
      try {
        forward_kinematics(g, s.theta1, s.theta2);
        s.feasible = true;
      } catch (const InfeasibleConfigError&) {
        s.feasible = false;
      }
      samples.push_back(s);
    }
  }
  return samples;
}

}  // namespace saltus
