#pragma once

#include "saltus/robot.hpp"

namespace saltus {

/// State of one position-controlled joint.
struct JointState {
  double theta = 0.0;      // [rad]
  double theta_dot = 0.0;  // [rad/s]
  double theta_cmd = 0.0;  // commanded position [rad]
  double work = 0.0;       // accumulated motor work [J]
};

/// Closed-loop motor torque: saturated PD toward the commanded position with
/// zero velocity reference,
///   tau = sat(kp (theta_cmd - theta) + kd (0 - theta_dot), tau_max).
/// `tau_cap` further limits |tau| for runs that derate the motors
/// (<= 0 means no extra cap).
double motor_torque(const JointState& s, const MotorSpec& spec,
                    double tau_cap = 0.0);

/// motor_torque with the no-load speed boundary: a motor spinning at or past
/// its speed limit cannot push further in the direction of motion (braking
/// torque is still available). Used where joint rates come from a kinematic
/// constraint rather than the integrator's velocity clamp.
double motor_torque_speed_limited(const JointState& s, const MotorSpec& spec,
                                  double tau_cap = 0.0);

/// Advance one joint by dt with semi-implicit Euler on
/// theta_ddot = (tau + tau_ext) / effective_inertia.
/// Velocity is clamped to the motor speed limit; position is clamped to the
/// [-30 deg, 125 deg] joint range with velocity zeroed at the stop.
/// Work done by the motor is accumulated into `work`.
/// Throws std::invalid_argument for dt <= 0 or dt > 1/400 s.
JointState step_joint(const JointState& s, const MotorSpec& spec,
                      double effective_inertia, double dt, double tau_cap = 0.0,
                      double tau_ext = 0.0);

}  // namespace saltus
