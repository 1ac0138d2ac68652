#include "saltus/primitives.hpp"

#include <cmath>

namespace saltus {

namespace {

constexpr double kDeg = M_PI / 180.0;
// Stroke timing as phase fractions: power sweep, fold, return sweep, unfold.
constexpr double kPowerEnd = 0.4;
constexpr double kFoldEnd = 0.5;
constexpr double kReturnEnd = 0.9;

// C1 ease within each segment keeps the servo commands gentle.
double ease(double x) { return 0.5 * (1.0 - std::cos(M_PI * std::clamp(x, 0.0, 1.0))); }

double clamp_joint(double v) {
  return std::clamp(v, kJointLimitLo + 2 * kDeg, kJointLimitHi - 2 * kDeg);
}

Vec3 axis_vector(Axis axis) {
  switch (axis) {
    case Axis::kRoll: return Vec3::UnitX();
    case Axis::kPitch: return Vec3::UnitY();
    case Axis::kYaw: return Vec3::UnitZ();
  }
  return Vec3::UnitX();
}

// Sweep position and extension state at phase u in [0,1).
void stroke(double u, double& sweep, double& extension) {
  if (u < kPowerEnd) {
    sweep = ease(u / kPowerEnd);
    extension = 0.0;
  } else if (u < kFoldEnd) {
    sweep = 1.0;
    extension = ease((u - kPowerEnd) / (kFoldEnd - kPowerEnd));
  } else if (u < kReturnEnd) {
    sweep = 1.0 - ease((u - kFoldEnd) / (kReturnEnd - kFoldEnd));
    extension = 1.0;
  } else {
    sweep = 0.0;
    extension = 1.0 - ease((u - kReturnEnd) / (1.0 - kReturnEnd));
  }
}

double twist_about(const Quat& from, const Quat& to, const Vec3& axis) {
  const Quat rel = quat_mul(from.conjugate(), to);
  return 2.0 * std::atan2(rel.vec().dot(axis), rel.w);
}

}  // namespace

const char* axis_name(Axis axis) {
  switch (axis) {
    case Axis::kRoll: return "roll";
    case Axis::kPitch: return "pitch";
    case Axis::kYaw: return "yaw";
  }
  return "roll";
}

std::array<double, kNumJoints> primitive_setpoints(const Primitive& p, double t) {
  double u = std::fmod(t / p.period, 1.0);
  if (u < 0.0) u += 1.0;
  if (p.mirrored) u = 1.0 - u;
  double sweep, extension;
  stroke(u, sweep, extension);

  std::array<double, kNumJoints> cmd{};
  if (p.axis == Axis::kRoll) {
    const double hip_fwd = p.hip_lo + sweep * (p.hip_hi - p.hip_lo);
    const double hip_bwd = p.hip_hi + p.hip_lo - hip_fwd;
    const double theta =
        p.theta_extended + extension * (p.theta_retracted - p.theta_extended);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const bool left = leg % 2 == 0;
      cmd[joint_index(leg, kHip)] = clamp_joint(left ? hip_fwd : hip_bwd);
      cmd[joint_index(leg, kTheta1)] = clamp_joint(theta);
      cmd[joint_index(leg, kTheta2)] = clamp_joint(theta);
    }
    return cmd;
  }

  if (p.axis == Axis::kPitch) {
    // Fore-aft paw stroke through the five-bar, extended legs on the power
    // sweep and retracted on the return.
    const double center =
        p.theta_extended + extension * (p.theta_retracted - p.theta_extended);
    const double delta = p.delta_max * (2.0 * sweep - 1.0);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      cmd[joint_index(leg, kHip)] = 0.0;
      cmd[joint_index(leg, kTheta1)] = clamp_joint(center + delta);
      cmd[joint_index(leg, kTheta2)] = clamp_joint(center - delta);
    }
    return cmd;
  }

  // Yaw: left and right paws stroke fore-aft in opposition. The yaw lever
  // arm is the lateral paw offset, so the power sweep runs with hips
  // abducted (paws far out) and the return with hips dropped.
  const double hip = p.hip_hi + extension * (p.hip_lo - p.hip_hi);
  const double delta = p.delta_max * (2.0 * sweep - 1.0);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const bool left = leg % 2 == 0;
    const double d = left ? delta : -delta;
    cmd[joint_index(leg, kHip)] = clamp_joint(hip);
    cmd[joint_index(leg, kTheta1)] = clamp_joint(p.theta_extended + d);
    cmd[joint_index(leg, kTheta2)] = clamp_joint(p.theta_extended - d);
  }
  return cmd;
}

Primitive make_primitive(Axis axis, const RobotModel& model) {
  Primitive p;
  p.axis = axis;
  if (axis == Axis::kYaw) {
    // Hip stroke between dropped and abducted; fixed mid-range extension.
    // The lower hip leaves room for fold overshoot clear of the torso.
    p.hip_lo = 25 * kDeg;
    p.hip_hi = 85 * kDeg;
    p.theta_extended = 45 * kDeg;
    p.theta_retracted = 45 * kDeg;
  }

  // Shrink stroke amplitudes until every setpoint pose along the cycle is
  // kinematically feasible and free of proxy contact.
  const double hip_mid = 0.5 * (p.hip_lo + p.hip_hi);
  const double hip_span = 0.5 * (p.hip_hi - p.hip_lo);
  const double ext0 = p.theta_extended;
  const double ret0 = p.theta_retracted;
  const double delta0 = p.delta_max;

  for (double scale = 1.0; scale >= 0.3; scale -= 0.05) {
    p.hip_lo = hip_mid - scale * hip_span;
    p.hip_hi = hip_mid + scale * hip_span;
    p.theta_extended = ret0 + scale * (ext0 - ret0);
    p.theta_retracted = ret0;
    p.delta_max = scale * delta0;

    bool ok = true;
    for (int i = 0; i < 64 && ok; ++i) {
      const auto cmd = primitive_setpoints(p, i * p.period / 64.0);
      for (int leg = 0; leg < kNumLegs && ok; ++leg) {
        try {
          forward_kinematics(model.leg_geometry(), cmd[joint_index(leg, kTheta1)],
                             cmd[joint_index(leg, kTheta2)]);
        } catch (const InfeasibleConfigError&) {
          ok = false;
        }
      }
      if (ok && model.self_collision(cmd).colliding) ok = false;
    }
    if (ok) return p;
  }
  return p;  // smallest stroke; a colliding run scores zero downstream
}

ReorientationResult run_primitive(const RobotModel& model, const Primitive& p,
                                  double duration, const FlightConfig& cfg,
                                  const TraceFn& trace) {
  SimState s = make_initial_state(model, SimMode::kFreeFloat, Quat::identity(),
                                  primitive_setpoints(p, 0.0));
  const Vec3 axis = axis_vector(p.axis);
  const double dt_ctrl = 1.0 / cfg.control_hz;
  const int ticks = static_cast<int>(std::lround(duration / dt_ctrl));

  ReorientationResult result;
  for (int tick = 0; tick < ticks; ++tick) {
    const Quat q_prev = s.q_body;
    const StepResult step = step_flight(model, cfg, s, primitive_setpoints(p, s.time));
    result.theta_achieved += twist_about(q_prev, s.q_body, axis);
    if (trace) trace(s.time, s);
    if (step.collided) {
      result.theta_achieved = 0.0;
      result.collided = true;
      result.duration = s.time;
      return result;
    }
  }
  result.duration = s.time;
  return result;
}

ReorientationResult run_reorientation(const RobotModel& model, Axis axis,
                                      double duration, const FlightConfig& cfg,
                                      const TraceFn& trace) {
  return run_primitive(model, make_primitive(axis, model), duration, cfg, trace);
}

}  // namespace saltus
