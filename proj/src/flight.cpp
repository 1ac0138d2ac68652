#include "saltus/flight.hpp"

#include <cmath>
#include <stdexcept>

namespace saltus {

void FlightConfig::validate() const {
  if (physics_hz < 400.0) {
    throw std::invalid_argument("FlightConfig: physics rate below 400 Hz");
  }
  if (control_hz <= 0.0 || physics_hz < control_hz) {
    throw std::invalid_argument("FlightConfig: bad control rate");
  }
}

int FlightConfig::substeps_per_control() const {
  return std::max(1, static_cast<int>(std::lround(physics_hz / control_hz)));
}

std::array<double, kNumJoints> SimState::joint_positions() const {
  std::array<double, kNumJoints> q{};
  for (int i = 0; i < kNumJoints; ++i) q[i] = joints[i].theta;
  return q;
}

std::array<double, kNumJoints> SimState::joint_velocities() const {
  std::array<double, kNumJoints> qd{};
  for (int i = 0; i < kNumJoints; ++i) qd[i] = joints[i].theta_dot;
  return qd;
}

MomentumTerms assemble_momentum(const RobotModel& model,
                                const std::array<double, kNumJoints>& q,
                                const std::array<double, kNumJoints>& qdot) {
  std::array<LegDynamics, kNumLegs> legs;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    legs[leg] = model.leg_momentum_terms(
        leg, q[joint_index(leg, kHip)], q[joint_index(leg, kTheta1)],
        q[joint_index(leg, kTheta2)],
        {qdot[joint_index(leg, kHip)], qdot[joint_index(leg, kTheta1)],
         qdot[joint_index(leg, kTheta2)]});
  }

  MomentumTerms out;
  const Inertia& body = model.body_inertia();
  out.mass = body.mass;
  Vec3 weighted = body.mass * body.com;
  for (const auto& leg : legs) {
    out.mass += leg.inertia.mass;
    weighted += leg.inertia.mass * leg.inertia.com;
  }
  out.com = weighted / out.mass;

  out.locked_inertia = moment_about_point(body, out.com);
  Vec3 lin_momentum = Vec3::Zero();
  Vec3 ang_momentum_origin = Vec3::Zero();
  for (const auto& leg : legs) {
    out.locked_inertia += moment_about_point(leg.inertia, out.com);
    lin_momentum += leg.lin_momentum;
    ang_momentum_origin += leg.ang_momentum_origin;
  }
  // Shift the joint-motion momentum from the body origin to the com.
  out.internal_momentum = ang_momentum_origin - out.com.cross(lin_momentum);
  return out;
}

Vec3 total_angular_momentum(const RobotModel& model, const SimState& s) {
  const MomentumTerms t =
      assemble_momentum(model, s.joint_positions(), s.joint_velocities());
  return s.q_body.rotate(t.locked_inertia * s.omega_body + t.internal_momentum);
}

Vec3 rod_axis(SimMode mode) {
  switch (mode) {
    case SimMode::kRodRoll: return Vec3::UnitX();
    case SimMode::kRodPitch: return Vec3::UnitY();
    case SimMode::kRodYaw: return Vec3::UnitZ();
    default: throw std::invalid_argument("rod_axis: not a rod mode");
  }
}

namespace {

bool is_rod(SimMode mode) {
  return mode == SimMode::kRodRoll || mode == SimMode::kRodPitch ||
         mode == SimMode::kRodYaw;
}

// Twist angle of q about a body axis (swing-twist decomposition).
double twist_angle(const Quat& q, const Vec3& axis) {
  const double proj = q.vec().dot(axis);
  return 2.0 * std::atan2(proj, q.w);
}

// Exact pure-axis orientation for rod modes; identically zero off-axis.
Quat rod_orientation(SimMode mode, double angle) {
  const Vec3 a = rod_axis(mode);
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return {std::cos(half), s * a.x(), s * a.y(), s * a.z()};
}

// Roll and pitch of the body (ZYX convention).
void roll_pitch(const Quat& q, double& roll, double& pitch) {
  roll = std::atan2(2.0 * (q.w * q.x + q.y * q.z),
                    1.0 - 2.0 * (q.x * q.x + q.y * q.y));
  const double sp = std::clamp(2.0 * (q.w * q.y - q.z * q.x), -1.0, 1.0);
  pitch = std::asin(sp);
}

// Gravity torque about the body origin (rod mount point), body frame.
Vec3 rod_gravity_torque(const MomentumTerms& t, const Quat& q, double gravity) {
  const Vec3 g_body = q.conjugate().rotate(Vec3(0.0, 0.0, -gravity));
  return t.com.cross(t.mass * g_body);
}

void solve_base_rates(const FlightConfig& cfg, SimState& s,
                      const MomentumTerms& t, double dt) {
  if (is_rod(s.mode)) {
    const Vec3 a = rod_axis(s.mode);
    // Angular momentum about the rod axis evolves under gravity only; the
    // mount carries everything off-axis.
    const double torque =
        rod_gravity_torque(t, s.q_body, cfg.rig_gravity).dot(a);
    s.rod_momentum += torque * dt;
    const double locked = a.dot(t.locked_inertia * a);
    const double rate = (s.rod_momentum - t.internal_momentum.dot(a)) / locked;
    const double rate_prev = s.omega_body.dot(a);
    s.omega_body = rate * a;
    s.rod_angle += 0.5 * (rate_prev + rate) * dt;
    s.q_body = rod_orientation(s.mode, s.rod_angle);
    return;
  }

  if (s.mode == SimMode::kRope) {
    double roll, pitch;
    roll_pitch(s.q_body, roll, pitch);
    const Vec3 torque_body(-cfg.rope_stiffness * roll - cfg.rope_damping * s.omega_body.x(),
                           -cfg.rope_stiffness * pitch - cfg.rope_damping * s.omega_body.y(),
                           0.0);
    s.ang_momentum_inertial += s.q_body.rotate(torque_body) * dt;
  }

  // Rates solved exactly at the current state keep the measured momentum
  // conserved to round-off; the orientation advances on the trapezoidal
  // mean of successive rates for second-order accuracy.
  const Vec3 l_body = s.q_body.conjugate().rotate(s.ang_momentum_inertial);
  const Vec3 omega_prev = s.omega_body;
  s.omega_body = t.locked_inertia.ldlt().solve(l_body - t.internal_momentum);
  s.q_body = integrate_quat(s.q_body, 0.5 * (omega_prev + s.omega_body), dt);
}

}  // namespace

void constrain(const RobotModel& model, SimMode mode, SimState& s) {
  s.mode = mode;
  if (is_rod(mode)) {
    const Vec3 a = rod_axis(mode);
    s.omega_body = s.omega_body.dot(a) * a;
    s.rod_angle = twist_angle(s.q_body, a);
    s.q_body = rod_orientation(mode, s.rod_angle);
    const MomentumTerms t =
        assemble_momentum(model, s.joint_positions(), s.joint_velocities());
    s.rod_momentum = a.dot(t.locked_inertia * s.omega_body) +
                     t.internal_momentum.dot(a);
    s.ang_momentum_inertial = Vec3::Zero();
    return;
  }
  s.ang_momentum_inertial = total_angular_momentum(model, s);
}

SimState make_initial_state(const RobotModel& model, SimMode mode,
                            const Quat& q0,
                            const std::array<double, kNumJoints>& joints,
                            const Vec3& omega) {
  SimState s;
  s.q_body = q0.normalized().canonical();
  s.omega_body = omega;
  for (int i = 0; i < kNumJoints; ++i) {
    s.joints[i].theta = joints[i];
    s.joints[i].theta_cmd = joints[i];
    s.joints[i].theta_dot = 0.0;
  }
  constrain(model, mode, s);
  return s;
}

StepResult step_flight(const RobotModel& model, const FlightConfig& cfg,
                       SimState& s,
                       const std::array<double, kNumJoints>& theta_cmd) {
  cfg.validate();
  for (int i = 0; i < kNumJoints; ++i) {
    s.joints[i].theta_cmd = theta_cmd[i];
  }

  // Effective inertia refreshed once per control tick.
  const auto inertia = model.joint_effective_inertia(s.joint_positions());

  const double dt = cfg.substep_dt();
  const int n = cfg.substeps_per_control();
  for (int sub = 0; sub < n; ++sub) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      std::array<double, kJointsPerLeg> tau_ext{};
      if (cfg.spring_enabled) {
        const Vec2 ts = spring_torque(model.leg_geometry(),
                                      s.joints[joint_index(leg, kTheta1)].theta,
                                      s.joints[joint_index(leg, kTheta2)].theta);
        tau_ext[kTheta1] = ts.x();
        tau_ext[kTheta2] = ts.y();
      }
      for (int role = 0; role < kJointsPerLeg; ++role) {
        const int j = joint_index(leg, static_cast<JointRole>(role));
        MotorSpec spec = model.motor_spec(j);
        spec.kp *= cfg.kp_scale[j];
        spec.kd *= cfg.kd_scale[j];
        s.joints[j] = step_joint(s.joints[j], spec, inertia[j], dt, cfg.tau_cap,
                                 tau_ext[role]);
      }
    }

    const MomentumTerms t =
        assemble_momentum(model, s.joint_positions(), s.joint_velocities());
    solve_base_rates(cfg, s, t, dt);
    s.time += dt;

    if (cfg.collision_check_every > 0 &&
        (sub + 1) % cfg.collision_check_every == 0) {
      const CollisionResult c = model.self_collision(s.joint_positions());
      if (c.colliding) {
        return {true, c.depth};
      }
    }
  }
  return {};
}

void advance_base(const RobotModel& model, SimState& s,
                  const std::array<double, kNumJoints>& q_mid,
                  const std::array<double, kNumJoints>& qdot_mid, double dt) {
  const MomentumTerms t = assemble_momentum(model, q_mid, qdot_mid);
  const Vec3 l_body = s.q_body.conjugate().rotate(s.ang_momentum_inertial);
  s.omega_body = t.locked_inertia.ldlt().solve(l_body - t.internal_momentum);
  s.q_body = integrate_quat(s.q_body, s.omega_body, dt);
  s.time += dt;
}

}  // namespace saltus
