#pragma once

#include <array>
#include <vector>

#include "saltus/geom.hpp"
#include "saltus/linkage.hpp"

namespace saltus {

constexpr int kNumLegs = 4;
constexpr int kJointsPerLeg = 3;  // hip, theta1, theta2
constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

constexpr double kJointLimitLo = -30.0 * M_PI / 180.0;
constexpr double kJointLimitHi = 125.0 * M_PI / 180.0;

/// Closed-loop position-controlled actuator parameters.
struct MotorSpec {
  double tau_max = 24.8;    // peak torque [N·m]
  double speed_max = 32.46; // output speed limit [rad/s]
  double kp = 40.0;         // [N·m/rad]
  double kd = 1.0;          // [N·m·s/rad]
  double mass = 0.610;      // [kg]

  static MotorSpec five_bar_default();  // AK70-10 class
  static MotorSpec hip_default();       // AK80-9 class
};

/// One point in the design search space.
struct DesignParams {
  double l_body = 0.6;     // hip-to-hip body length [m]
  double w_body_f = 0.21;  // front leg separation [m]
  double w_body_b = 0.30;  // back leg separation [m]
  LegGeometry leg;
  double m_l = 0.63;            // mass per leg, links + paw [kg]
  double m_e = 2.0;             // electronics mass [kg]
  double m_m = 6.82;            // total motor mass, 12 motors [kg]
  double paw_extra_mass = 0.1;  // added paw mass [kg]

  static DesignParams baseline();
  void validate() const;
};

/// Inclusive search bounds for a design field.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo - 1e-12 && v <= hi + 1e-12; }
};

/// Search-space bounds for the design grid.
struct SearchSpace {
  ParamRange m_l{0.39, 0.63};
  ParamRange l_body{0.4, 1.0};
  ParamRange w_body_f{0.2, 0.6};
  ParamRange w_body_b{0.2, 0.6};
  ParamRange l1{0.10, 0.30};
  ParamRange l3{0.15, 0.45};
  ParamRange spring_k{600.0, 1000.0};
};

/// Joint index layout: leg-major, [hip, theta1, theta2] per leg.
/// Legs: 0 = front-left, 1 = front-right, 2 = back-left, 3 = back-right.
enum JointRole { kHip = 0, kTheta1 = 1, kTheta2 = 2 };
inline int joint_index(int leg, JointRole role) { return leg * kJointsPerLeg + role; }

struct LegFrame {
  Vec3 hip = Vec3::Zero();  // hip origin in body frame
  double side_sign = 1.0;   // +1 left, -1 right
};

/// Per-leg composite dynamic quantities at a pose, in the body frame.
/// Velocities are rates relative to the body frame (base held fixed).
struct LegDynamics {
  Inertia inertia;                       // about its own center of mass
  Vec3 lin_momentum = Vec3::Zero();      // sum m_i v_i
  Vec3 ang_momentum_origin = Vec3::Zero();  // about the body origin
};

/// Body-frame proxy geometry of one leg at a pose.
struct LegPoints {
  Vec3 motor1, motor2, knee1, knee2, paw;
};

struct CollisionResult {
  bool colliding = false;
  double depth = 0.0;  // max penetration depth [m], 0 when separated
};

/// Full physical model derived from DesignParams. Immutable after build;
/// share read-only across environments.
class RobotModel {
 public:
  static RobotModel build(const DesignParams& p);

  const DesignParams& params() const { return params_; }
  const LegGeometry& leg_geometry() const { return params_.leg; }
  const std::array<LegFrame, kNumLegs>& legs() const { return legs_; }
  const Inertia& body_inertia() const { return body_inertia_; }
  double total_mass() const { return total_mass_; }

  const MotorSpec& motor_spec(int joint) const;
  double upper_link_mass() const { return m_upper_; }
  double lower_link_mass() const { return m_lower_; }
  double paw_mass() const { return m_paw_; }
  double paw_radius() const { return paw_radius_; }
  Vec3 torso_half_extents() const { return torso_half_extents_; }
  Vec3 torso_center() const { return torso_center_; }

  /// Leg proxy points in the body frame.
  LegPoints leg_points(int leg, double hip, double theta1, double theta2) const;

  /// Composite inertia and internal momentum of one leg.
  /// rates = (hip_rate, theta1_rate, theta2_rate).
  LegDynamics leg_momentum_terms(int leg, double hip, double theta1,
                                 double theta2, const Vec3& rates) const;

  /// Composite inertia of one leg at a pose (no rates needed).
  Inertia leg_inertia(int leg, double hip, double theta1, double theta2) const;

  /// Effective inertia seen by each joint's motor at a pose: reflected rotor
  /// inertia plus the pose-frozen link inertia about that joint's axis.
  std::array<double, kNumJoints> joint_effective_inertia(
      const std::array<double, kNumJoints>& q) const;

  /// Sphere/capsule/box proxy test among legs and torso.
  CollisionResult self_collision(const std::array<double, kNumJoints>& q) const;

  /// Copy with every mass (and moment) scaled; geometry unchanged.
  RobotModel with_mass_scale(double scale) const;

  /// Individual leg bodies (upper links, lower links, paw) at a pose, body
  /// frame. Exposed for oracle-style verification.
  std::vector<Inertia> leg_bodies(int leg, double hip, double theta1,
                                  double theta2) const;

 private:
  DesignParams params_;
  std::array<LegFrame, kNumLegs> legs_;
  Inertia body_inertia_;   // torso structure + electronics + all 12 motors
  double total_mass_ = 0.0;
  double m_upper_ = 0.0;   // each of l1, l2
  double m_lower_ = 0.0;   // each of l3, l4
  double m_paw_ = 0.0;     // including paw_extra_mass
  double paw_radius_ = 0.025;
  double upper_rod_radius_ = 0.015;
  double lower_rod_radius_ = 0.012;
  double rotor_inertia_ = 0.005;  // reflected at the joint [kg·m²]
  Vec3 torso_half_extents_ = Vec3::Zero();
  Vec3 torso_center_ = Vec3::Zero();
  MotorSpec five_bar_spec_;
  MotorSpec hip_spec_;
};

}  // namespace saltus
