#pragma once

#include <stdexcept>
#include <vector>

#include "saltus/geom.hpp"

namespace saltus {

struct InfeasibleConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Five-bar diamond leg: two actuated upper links of equal length hang from
/// motor axes separated by l0; two equal lower links meet at the paw. A
/// tension-only spring cord connects the two knee joints.
struct LegGeometry {
  double l0 = 0.09;          // motor axis separation [m]
  double l1 = 0.175;         // upper link length, both sides [m]
  double l3 = 0.30;          // lower link length, both sides [m]
  double spring_k = 800.0;   // [N/m]
  double spring_rest = 0.18; // cord natural length [m]

  /// Throws std::invalid_argument when lengths are non-positive or the paw
  /// cannot reach the symmetric pose (l3 <= l0/2).
  void validate() const;

  /// Paw depth with both motor angles at zero (links vertical).
  double extended_depth() const;
};

/// Leg-plane pose. Frame: origin midway between the motor axes, x from
/// motor 1 toward motor 2, y down along the extended leg.
///
/// Motor angles are zero with links vertical, positive swinging each knee
/// away from the other motor, so theta1 == theta2 is a mirror-symmetric pose
/// and both joints share the same mechanical limits.
struct LegPose {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Vec2 knee1 = Vec2::Zero();
  Vec2 knee2 = Vec2::Zero();
  Vec2 paw = Vec2::Zero();
};

Vec2 motor1_position(const LegGeometry& g);
Vec2 motor2_position(const LegGeometry& g);
Vec2 knee1_position(const LegGeometry& g, double theta1);
Vec2 knee2_position(const LegGeometry& g, double theta2);

/// Closed-chain forward kinematics. The paw is the distal (larger-y) circle
/// intersection. Throws InfeasibleConfigError when the knee circles do not
/// intersect or coincide.
LegPose forward_kinematics(const LegGeometry& g, double theta1, double theta2);

/// Motor angles reaching a paw point, knees on the outward branch.
/// Throws InfeasibleConfigError when the point is out of reach.
LegPose inverse_kinematics(const LegGeometry& g, const Vec2& paw);

/// d(paw)/d(theta1, theta2). Throws SingularConfigError when the knees are
/// collinear with the paw (chain fold/stretch singularity).
Mat2 jacobian(const LegGeometry& g, double theta1, double theta2);

/// Knee-to-knee distance at a pose.
double knee_distance(const LegGeometry& g, double theta1, double theta2);

/// Joint torques from the unilateral knee spring: zero while the cord is
/// slack (knee distance <= rest), otherwise -k(d - rest) * dd/dtheta.
Vec2 spring_torque(const LegGeometry& g, double theta1, double theta2);

/// Elastic energy stored in the engaged cord, zero when slack.
double spring_energy(const LegGeometry& g, double theta1, double theta2);

struct WorkspaceSample {
  double theta1 = 0.0;
  double theta2 = 0.0;
  bool feasible = false;
};

/// Feasibility map on an n x n grid over [lo, hi]^2.
std::vector<WorkspaceSample> workspace_sample(const LegGeometry& g, double lo,
                                              double hi, int n);

}  // namespace saltus
