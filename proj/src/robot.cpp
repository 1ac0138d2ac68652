#include "saltus/robot.hpp"

#include <cmath>
#include <stdexcept>

namespace saltus {

namespace {

// Structure mass rule: fixed hardware plus a frame of two rails and two
// cross bars, calibrated so the baseline design totals 13.8 kg (no paw
// extras).
constexpr double kStructLinearDensity = 1.2;  // [kg/m]
constexpr double kStructFixedMass = 0.408;    // [kg]

constexpr double kPawMassFraction = 0.12;  // share of m_l in the paw
constexpr double kTorsoHeight = 0.12;      // [m]
constexpr double kCollisionMargin = 0.01;  // torso box inflation [m]
constexpr double kUpperCapsuleRadius = 0.015;
constexpr double kLowerCapsuleRadius = 0.015;
// Torso slab rides above the hip line so adducting legs clear its underside.
const Vec3 kTorsoCenter(0.0, 0.0, 0.04);

// AK70-10: 610 g, AK80-9: 485 g; 8 + 4 of them total 6.82 kg.
constexpr double kFiveBarMotorMassBase = 0.610;
constexpr double kHipMotorMassBase = 0.485;
constexpr double kMotorMassBaseTotal = 6.82;

double rpm_to_rad(double rpm) { return rpm * 2.0 * M_PI / 60.0; }

Mat3 rot_x(double a) {
  Mat3 r;
  const double c = std::cos(a), s = std::sin(a);
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

// Leg plane (x: forward, y: down along leg) to body-frame direction.
Vec3 plane_to_body(const Vec2& p) { return {p.x(), 0.0, -p.y()}; }

// Closest-point distance between two segments.
double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) {
    return r.norm();
  }
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 1e-18) {
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      }
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p1 + s * d1 - (p2 + t * d2)).norm();
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 <= 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double point_box_distance(const Vec3& p, const Vec3& half) {
  const Vec3 d(std::max(std::abs(p.x()) - half.x(), 0.0),
               std::max(std::abs(p.y()) - half.y(), 0.0),
               std::max(std::abs(p.z()) - half.z(), 0.0));
  return d.norm();
}

// Segment-box distance via dense sampling; exact enough for proxy contacts.
double segment_box_distance(const Vec3& a, const Vec3& b, const Vec3& half) {
  constexpr int kSamples = 9;
  double best = std::numeric_limits<double>::max();
  for (int i = 0; i < kSamples; ++i) {
    const double t = static_cast<double>(i) / (kSamples - 1);
    best = std::min(best, point_box_distance(a + t * (b - a), half));
  }
  return best;
}

struct BodyKin {
  Inertia inertia;  // body frame, moment about own com
  Vec3 vel;         // com velocity relative to the body frame
  Vec3 omega;       // angular velocity relative to the body frame
};

}  // namespace

MotorSpec MotorSpec::five_bar_default() {
  return {24.8, rpm_to_rad(310.0), 40.0, 1.0, kFiveBarMotorMassBase};
}

MotorSpec MotorSpec::hip_default() {
  return {18.0, rpm_to_rad(390.0), 40.0, 1.0, kHipMotorMassBase};
}

DesignParams DesignParams::baseline() { return DesignParams{}; }

void DesignParams::validate() const {
  leg.validate();
  if (l_body <= 0.0 || w_body_f <= 0.0 || w_body_b <= 0.0) {
    throw std::invalid_argument("DesignParams: body dimensions must be positive");
  }
  if (m_l <= 0.0 || m_e <= 0.0 || m_m <= 0.0 || paw_extra_mass < 0.0) {
    throw std::invalid_argument("DesignParams: masses must be positive");
  }
}

RobotModel RobotModel::build(const DesignParams& p) {
  p.validate();
  RobotModel m;
  m.params_ = p;
  m.five_bar_spec_ = MotorSpec::five_bar_default();
  m.hip_spec_ = MotorSpec::hip_default();

  const double motor_scale = p.m_m / kMotorMassBaseTotal;
  m.five_bar_spec_.mass = kFiveBarMotorMassBase * motor_scale;
  m.hip_spec_.mass = kHipMotorMassBase * motor_scale;

  m.legs_[0] = {{+0.5 * p.l_body, +0.5 * p.w_body_f, 0.0}, +1.0};
  m.legs_[1] = {{+0.5 * p.l_body, -0.5 * p.w_body_f, 0.0}, -1.0};
  m.legs_[2] = {{-0.5 * p.l_body, +0.5 * p.w_body_b, 0.0}, +1.0};
  m.legs_[3] = {{-0.5 * p.l_body, -0.5 * p.w_body_b, 0.0}, -1.0};

  // Per-leg link masses: fixed paw share, remainder split by link length.
  const double link_total = 2.0 * (p.leg.l1 + p.leg.l3);
  const double link_mass = (1.0 - kPawMassFraction) * p.m_l;
  m.m_upper_ = link_mass * p.leg.l1 / link_total;
  m.m_lower_ = link_mass * p.leg.l3 / link_total;
  m.m_paw_ = kPawMassFraction * p.m_l + p.paw_extra_mass;

  const double m_struct = kStructFixedMass +
      kStructLinearDensity * (2.0 * p.l_body + p.w_body_f + p.w_body_b);

  std::vector<std::pair<Inertia, PartPose>> body_parts;
  const double w_avg = 0.5 * (p.w_body_f + p.w_body_b);
  body_parts.push_back(
      {Inertia::cuboid(m_struct, {p.l_body, 0.7 * w_avg, kTorsoHeight}, kTorsoCenter),
       {}});
  body_parts.push_back(
      {Inertia::cuboid(p.m_e, {0.25, 0.15, 0.10}, Vec3::Zero()), {}});
  for (const auto& leg : m.legs_) {
    // Hip motor on the hip, the two 5-bar motors on the hip axis beside it;
    // all three stay body-fixed under hip rotation.
    body_parts.push_back({Inertia::sphere(m.hip_spec_.mass, 0.04, leg.hip), {}});
    const Vec3 off(0.5 * p.leg.l0, 0.0, 0.0);
    body_parts.push_back(
        {Inertia::sphere(m.five_bar_spec_.mass, 0.04, leg.hip - off), {}});
    body_parts.push_back(
        {Inertia::sphere(m.five_bar_spec_.mass, 0.04, leg.hip + off), {}});
  }
  m.body_inertia_ = compose_inertia(body_parts);

  m.total_mass_ = m.body_inertia_.mass + 4.0 * (p.m_l + p.paw_extra_mass);

  m.torso_center_ = kTorsoCenter;
  m.torso_half_extents_ =
      Vec3(0.95 * 0.5 * p.l_body, 0.30 * std::min(p.w_body_f, p.w_body_b),
           0.5 * kTorsoHeight) +
      Vec3::Constant(kCollisionMargin);
  return m;
}

const MotorSpec& RobotModel::motor_spec(int joint) const {
  return (joint % kJointsPerLeg == kHip) ? hip_spec_ : five_bar_spec_;
}

LegPoints RobotModel::leg_points(int leg, double hip, double theta1,
                                 double theta2) const {
  const LegFrame& frame = legs_.at(leg);
  const LegPose pose = forward_kinematics(params_.leg, theta1, theta2);
  const Mat3 rot = rot_x(frame.side_sign * hip);
  const auto to_body = [&](const Vec2& p) -> Vec3 {
    return frame.hip + rot * plane_to_body(p);
  };
  LegPoints pts;
  pts.motor1 = to_body(motor1_position(params_.leg));
  pts.motor2 = to_body(motor2_position(params_.leg));
  pts.knee1 = to_body(pose.knee1);
  pts.knee2 = to_body(pose.knee2);
  pts.paw = to_body(pose.paw);
  return pts;
}

std::vector<Inertia> RobotModel::leg_bodies(int leg, double hip, double theta1,
                                            double theta2) const {
  const LegPoints pts = leg_points(leg, hip, theta1, theta2);
  return {
      Inertia::rod(m_upper_, upper_rod_radius_, pts.motor1, pts.knee1),
      Inertia::rod(m_upper_, upper_rod_radius_, pts.motor2, pts.knee2),
      Inertia::rod(m_lower_, lower_rod_radius_, pts.knee1, pts.paw),
      Inertia::rod(m_lower_, lower_rod_radius_, pts.knee2, pts.paw),
      Inertia::sphere(m_paw_, paw_radius_, pts.paw),
  };
}

Inertia RobotModel::leg_inertia(int leg, double hip, double theta1,
                                double theta2) const {
  std::vector<std::pair<Inertia, PartPose>> parts;
  for (const auto& body : leg_bodies(leg, hip, theta1, theta2)) {
    parts.push_back({body, {}});
  }
  return compose_inertia(parts);
}

namespace {

// Kinematics of the five leg bodies at a pose with given joint rates.
std::array<BodyKin, 5> leg_body_kinematics(const LegGeometry& g,
                                           const LegFrame& frame,
                                           double m_upper, double m_lower,
                                           double m_paw, double r_upper,
                                           double r_lower, double r_paw,
                                           double hip, double theta1,
                                           double theta2, const Vec3& rates) {
  const LegPose pose = forward_kinematics(g, theta1, theta2);
  Mat2 jac;
  try {
    jac = jacobian(g, theta1, theta2);
  } catch (const SingularConfigError&) {
    // Paw velocity is momentarily undefined at the fold; freeze it.
    jac.setZero();
  }

  const double hip_rate = frame.side_sign * rates[0];
  const double t1_rate = rates[1];
  const double t2_rate = rates[2];

  const Vec2 dk1 = g.l1 * Vec2{-std::cos(theta1), -std::sin(theta1)} * t1_rate;
  const Vec2 dk2 = g.l1 * Vec2{std::cos(theta2), -std::sin(theta2)} * t2_rate;
  const Vec2 dpaw = jac * Vec2{t1_rate, t2_rate};

  // In-plane angular rate of a lower link from its endpoint motion.
  const auto link_rate = [&](const Vec2& knee, const Vec2& dknee) {
    const Vec2 d = pose.paw - knee;
    const Vec2 dd = dpaw - dknee;
    return (d.x() * dd.y() - d.y() * dd.x()) / d.squaredNorm();
  };

  const Mat3 rot = rot_x(frame.side_sign * hip);
  const Vec3 plane_normal = rot * Vec3::UnitY();
  const Vec3 hip_omega = hip_rate * Vec3::UnitX();

  const auto to_body = [&](const Vec2& p) -> Vec3 {
    return frame.hip + rot * plane_to_body(p);
  };
  const auto vel_of = [&](const Vec2& p, const Vec2& dp) -> Vec3 {
    const Vec3 r_rel = rot * plane_to_body(p);
    return hip_omega.cross(r_rel) + rot * plane_to_body(dp);
  };

  const Vec2 m1 = motor1_position(g), m2 = motor2_position(g);
  return {{
      {Inertia::rod(m_upper, r_upper, to_body(m1), to_body(pose.knee1)),
       vel_of(0.5 * (m1 + pose.knee1), 0.5 * dk1),
       hip_omega + t1_rate * plane_normal},
      {Inertia::rod(m_upper, r_upper, to_body(m2), to_body(pose.knee2)),
       vel_of(0.5 * (m2 + pose.knee2), 0.5 * dk2),
       hip_omega - t2_rate * plane_normal},
      {Inertia::rod(m_lower, r_lower, to_body(pose.knee1), to_body(pose.paw)),
       vel_of(0.5 * (pose.knee1 + pose.paw), 0.5 * (dk1 + dpaw)),
       hip_omega + link_rate(pose.knee1, dk1) * plane_normal},
      {Inertia::rod(m_lower, r_lower, to_body(pose.knee2), to_body(pose.paw)),
       vel_of(0.5 * (pose.knee2 + pose.paw), 0.5 * (dk2 + dpaw)),
       hip_omega + link_rate(pose.knee2, dk2) * plane_normal},
      {Inertia::sphere(m_paw, r_paw, to_body(pose.paw)), vel_of(pose.paw, dpaw),
       hip_omega},
  }};
}

}  // namespace

LegDynamics RobotModel::leg_momentum_terms(int leg, double hip, double theta1,
                                           double theta2,
                                           const Vec3& rates) const {
  const auto bodies = leg_body_kinematics(
      params_.leg, legs_.at(leg), m_upper_, m_lower_, m_paw_, upper_rod_radius_,
      lower_rod_radius_, paw_radius_, hip, theta1, theta2, rates);

  LegDynamics dyn;
  std::vector<std::pair<Inertia, PartPose>> parts;
  for (const auto& b : bodies) {
    parts.push_back({b.inertia, {}});
    dyn.lin_momentum += b.inertia.mass * b.vel;
    dyn.ang_momentum_origin +=
        b.inertia.mass * b.inertia.com.cross(b.vel) + b.inertia.moment * b.omega;
  }
  dyn.inertia = compose_inertia(parts);
  return dyn;
}

std::array<double, kNumJoints> RobotModel::joint_effective_inertia(
    const std::array<double, kNumJoints>& q) const {
  std::array<double, kNumJoints> out{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double hip = q[joint_index(leg, kHip)];
    const double t1 = q[joint_index(leg, kTheta1)];
    const double t2 = q[joint_index(leg, kTheta2)];
    for (int role = 0; role < kJointsPerLeg; ++role) {
      Vec3 unit_rate = Vec3::Zero();
      unit_rate[role] = 1.0;
      const auto bodies = leg_body_kinematics(
          params_.leg, legs_[leg], m_upper_, m_lower_, m_paw_,
          upper_rod_radius_, lower_rod_radius_, paw_radius_, hip, t1, t2,
          unit_rate);
      // Twice the kinetic energy at unit joint rate.
      double twice_ke = 0.0;
      for (const auto& b : bodies) {
        twice_ke += b.inertia.mass * b.vel.squaredNorm() +
                    b.omega.dot(b.inertia.moment * b.omega);
      }
      out[joint_index(leg, static_cast<JointRole>(role))] =
          rotor_inertia_ + twice_ke;
    }
  }
  return out;
}

CollisionResult RobotModel::self_collision(
    const std::array<double, kNumJoints>& q) const {
  std::array<LegPoints, kNumLegs> pts;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    try {
      pts[leg] = leg_points(leg, q[joint_index(leg, kHip)],
                            q[joint_index(leg, kTheta1)],
                            q[joint_index(leg, kTheta2)]);
    } catch (const InfeasibleConfigError&) {
      // Infeasible chain counts as a hard fault; report as deep contact.
      return {true, 1.0};
    }
  }

  struct Capsule {
    Vec3 a, b;
    double r;
  };
  std::array<std::array<Capsule, 4>, kNumLegs> capsules;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    capsules[leg] = {{{pts[leg].motor1, pts[leg].knee1, kUpperCapsuleRadius},
                      {pts[leg].motor2, pts[leg].knee2, kUpperCapsuleRadius},
                      {pts[leg].knee1, pts[leg].paw, kLowerCapsuleRadius},
                      {pts[leg].knee2, pts[leg].paw, kLowerCapsuleRadius}}};
  }

  double depth = 0.0;
  const auto note = [&depth](double dist, double radii) {
    depth = std::max(depth, radii - dist);
  };

  for (int i = 0; i < kNumLegs; ++i) {
    for (int j = i + 1; j < kNumLegs; ++j) {
      for (const auto& ci : capsules[i]) {
        for (const auto& cj : capsules[j]) {
          note(segment_segment_distance(ci.a, ci.b, cj.a, cj.b), ci.r + cj.r);
        }
        note(point_segment_distance(pts[j].paw, ci.a, ci.b), ci.r + paw_radius_);
      }
      for (const auto& cj : capsules[j]) {
        note(point_segment_distance(pts[i].paw, cj.a, cj.b), cj.r + paw_radius_);
      }
      note((pts[i].paw - pts[j].paw).norm(), 2.0 * paw_radius_);
    }
  }

  // Legs against the torso box (axis-aligned in the body frame).
  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (const auto& c : capsules[leg]) {
      note(segment_box_distance(c.a - torso_center_, c.b - torso_center_,
                                torso_half_extents_),
           c.r);
    }
    note(point_box_distance(pts[leg].paw - torso_center_, torso_half_extents_),
         paw_radius_);
  }

  return {depth > 0.0, std::max(depth, 0.0)};
}

RobotModel RobotModel::with_mass_scale(double scale) const {
  if (scale <= 0.0) {
    throw std::invalid_argument("with_mass_scale: scale must be positive");
  }
  RobotModel m = *this;
  m.params_.m_l *= scale;
  m.params_.m_e *= scale;
  m.params_.m_m *= scale;
  m.params_.paw_extra_mass *= scale;
  m.m_upper_ *= scale;
  m.m_lower_ *= scale;
  m.m_paw_ *= scale;
  m.total_mass_ *= scale;
  m.body_inertia_.mass *= scale;
  m.body_inertia_.moment *= scale;
  return m;
}

}  // namespace saltus
