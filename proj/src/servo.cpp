#include "saltus/servo.hpp"

#include <cmath>
#include <stdexcept>

namespace saltus {

double motor_torque(const JointState& s, const MotorSpec& spec, double tau_cap) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.theta_dot) ||
      !std::isfinite(s.theta_cmd)) {
    throw std::invalid_argument("motor_torque: non-finite state");
  }
  double limit = spec.tau_max;
  if (tau_cap > 0.0) limit = std::min(limit, tau_cap);
  const double tau = spec.kp * (s.theta_cmd - s.theta) + spec.kd * (0.0 - s.theta_dot);
  return std::clamp(tau, -limit, limit);
}

double motor_torque_speed_limited(const JointState& s, const MotorSpec& spec,
                                  double tau_cap) {
  const double tau = motor_torque(s, spec, tau_cap);
  if (s.theta_dot >= spec.speed_max && tau > 0.0) return 0.0;
  if (s.theta_dot <= -spec.speed_max && tau < 0.0) return 0.0;
  return tau;
}

JointState step_joint(const JointState& s, const MotorSpec& spec,
                      double effective_inertia, double dt, double tau_cap,
                      double tau_ext) {
  if (dt <= 0.0) {
    throw std::invalid_argument("step_joint: dt must be positive");
  }
  if (dt > 1.0 / 400.0 + 1e-12) {
    throw std::invalid_argument("step_joint: dt exceeds the 400 Hz physics floor");
  }
  if (effective_inertia <= 0.0) {
    throw std::invalid_argument("step_joint: effective inertia must be positive");
  }

  const double tau = motor_torque(s, spec, tau_cap);
  JointState out = s;
  out.theta_dot = s.theta_dot + (tau + tau_ext) / effective_inertia * dt;
  out.theta_dot = std::clamp(out.theta_dot, -spec.speed_max, spec.speed_max);
  out.theta = s.theta + out.theta_dot * dt;
  bool stopped = false;
  if (out.theta >= kJointLimitHi) {
    out.theta = kJointLimitHi;
    out.theta_dot = 0.0;
    stopped = true;
  } else if (out.theta <= kJointLimitLo) {
    out.theta = kJointLimitLo;
    out.theta_dot = 0.0;
    stopped = true;
  }
  if (stopped) {
    // Work over the displacement that actually happened; torque held
    // against the stop moves nothing.
    out.work = s.work + tau * (out.theta - s.theta);
  } else {
    // Midpoint-velocity quadrature; exact against the kinetic energy
    // change of the semi-implicit update.
    out.work = s.work + tau * 0.5 * (s.theta_dot + out.theta_dot) * dt;
  }
  return out;
}

}  // namespace saltus
