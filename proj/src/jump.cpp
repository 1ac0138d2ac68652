#include "saltus/jump.hpp"

#include <cmath>
#include <random>

#include "saltus/servo.hpp"

namespace saltus {

namespace {

constexpr double kDeg = M_PI / 180.0;

JumpPhase squat_phase() { return {1.0, 120 * kDeg, 120 * kDeg, true}; }
JumpPhase hold_phase(double t1, double t2) { return {0.5, t1, t2, false}; }
JumpPhase launch_phase() { return {2.0, 10 * kDeg, 10 * kDeg, false}; }

// Planar rotation, body (x fwd, z up) to world; positive pitch noses down.
Mat2 rot_body_to_world(double pitch) {
  Mat2 r;
  r << std::cos(pitch), std::sin(pitch), -std::sin(pitch), std::cos(pitch);
  return r;
}

Mat2 rot_body_to_world_deriv(double pitch) {
  Mat2 r;
  r << -std::sin(pitch), std::cos(pitch), -std::cos(pitch), -std::sin(pitch);
  return r;
}

// Commanded five-bar setpoints at time t within the schedule.
void setpoints_at(const JumpSequence& seq, double t, double& t1, double& t2) {
  double prev1 = 0.0, prev2 = 0.0;
  double start = 0.0;
  for (const auto& phase : seq.phases) {
    if (t < start + phase.duration) {
      if (phase.ramp) {
        const double u = (t - start) / phase.duration;
        t1 = prev1 + u * (phase.theta1 - prev1);
        t2 = prev2 + u * (phase.theta2 - prev2);
      } else {
        t1 = phase.theta1;
        t2 = phase.theta2;
      }
      return;
    }
    start += phase.duration;
    prev1 = phase.theta1;
    prev2 = phase.theta2;
  }
  t1 = prev1;
  t2 = prev2;
}

struct PairState {
  Vec2 pin = Vec2::Zero();  // world contact point while in contact
  bool contact = true;
  JointState j1, j2;        // five-bar joints (shared by both legs of a pair)
  double torque_scale = 1.0;
  double power_prev = 0.0;
};

}  // namespace

JumpSequence vertical_jump_sequence() {
  JumpSequence seq;
  seq.phases = {squat_phase(), hold_phase(120 * kDeg, 120 * kDeg), launch_phase()};
  return seq;
}

JumpSequence forward_jump_sequence() {
  JumpSequence seq;
  // Lean: squat setpoints shifted 45 deg in the per-motor sign convention,
  // i.e. +45 on motor 1 and -45 on motor 2 of every leg. Motor 1 clamps at
  // its mechanical stop.
  const double lean1 = 165 * kDeg;
  const double lean2 = 75 * kDeg;
  seq.phases = {squat_phase(), hold_phase(120 * kDeg, 120 * kDeg),
                JumpPhase{1.0, lean1, lean2, true}, hold_phase(lean1, lean2),
                launch_phase()};
  seq.asymmetry_std = 0.02;
  return seq;
}

JumpMetrics run_jump(const RobotModel& model, const JumpSequence& seq,
                     uint64_t seed, const JumpProbeFn& probe) {
  const LegGeometry& geom = model.leg_geometry();
  const MotorSpec& spec = model.motor_spec(joint_index(0, kTheta1));
  const double mass = model.total_mass();
  const double g = seq.gravity;
  const double dt = 1.0 / seq.physics_hz;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Body state: origin position, pitch, rates.
  const double stand_height = geom.extended_depth() + model.paw_radius();
  Vec2 pos(0.0, stand_height);
  Vec2 vel = Vec2::Zero();
  double pitch = 0.0, pitch_rate = 0.0;

  const double half_body = 0.5 * model.params().l_body;
  std::array<PairState, 2> pairs;  // 0: front, 1: back
  for (int i = 0; i < 2; ++i) {
    const double hx = (i == 0 ? half_body : -half_body);
    pairs[i].pin = Vec2(hx, model.paw_radius());
    pairs[i].torque_scale = 1.0 + seq.asymmetry_std * noise(rng);
  }

  JumpMetrics metrics;
  double schedule_len = 0.0;
  for (const auto& p : seq.phases) schedule_len += p.duration;

  const auto joint_array = [&]() {
    std::array<double, kNumJoints> q{};
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const PairState& p = pairs[leg < 2 ? 0 : 1];
      q[joint_index(leg, kTheta1)] = p.j1.theta;
      q[joint_index(leg, kTheta2)] = p.j2.theta;
    }
    return q;
  };
  double inertia_cache = model.body_inertia().moment(1, 1);
  const auto pitch_inertia = [&]() {
    std::array<double, kNumJoints> qd{};
    try {
      inertia_cache = assemble_momentum(model, joint_array(), qd).locked_inertia(1, 1);
    } catch (const InfeasibleConfigError&) {
      // Keep the previous value across a transiently infeasible pose.
    }
    return inertia_cache;
  };
  const auto spring_stored = [&]() {
    if (!seq.spring_enabled) return 0.0;
    double e = 0.0;
    for (const auto& pair : pairs) {
      e += 2.0 * spring_energy(geom, pair.j1.theta, pair.j2.theta);
    }
    return e;
  };
  const double spring_e0 = spring_stored();

  double t = 0.0;
  bool airborne = false;
  double spring_at_liftoff = 0.0;
  while (t < schedule_len + 1.5 && !airborne) {
    double cmd1, cmd2;
    setpoints_at(seq, t, cmd1, cmd2);
    for (auto& pair : pairs) {
      pair.j1.theta_cmd = cmd1;
      pair.j2.theta_cmd = cmd2;
    }

    Vec2 force_sum = Vec2::Zero();
    double torque_sum = 0.0;
    double fz_total = 0.0;
    const Mat2 r_bw = rot_body_to_world(pitch);
    const Mat2 r_bw_d = rot_body_to_world_deriv(pitch);

    int in_contact = 0;
    for (int i = 0; i < 2; ++i) {
      PairState& pair = pairs[i];
      const Vec2 r_hip(i == 0 ? half_body : -half_body, 0.0);
      const Vec2 hip_w = pos + r_bw * r_hip;

      if (!pair.contact) {
        // Unloaded pair: joints swing freely under the servo; touch down
        // when the paw reaches the ground while descending.
        double i1 = 0.03, i2 = 0.03;
        try {
          const auto inertia = model.joint_effective_inertia(joint_array());
          i1 = inertia[joint_index(i == 0 ? 0 : 2, kTheta1)];
          i2 = inertia[joint_index(i == 0 ? 0 : 2, kTheta2)];
        } catch (const InfeasibleConfigError&) {
        }
        Vec2 tau_ext = Vec2::Zero();
        if (seq.spring_enabled) {
          tau_ext = spring_torque(geom, pair.j1.theta, pair.j2.theta);
        }
        const JointState j1_prev = pair.j1;
        const JointState j2_prev = pair.j2;
        pair.j1 = step_joint(pair.j1, spec, i1, dt, seq.tau_cap, tau_ext.x());
        pair.j2 = step_joint(pair.j2, spec, i2, dt, seq.tau_cap, tau_ext.y());
        pair.power_prev = 0.0;
        try {
          const LegPose pose =
              forward_kinematics(geom, pair.j1.theta, pair.j2.theta);
          // Swing-leg motor work still counts toward the energy budget.
          metrics.motor_work +=
              2.0 * (pair.j1.work - j1_prev.work + pair.j2.work - j2_prev.work);
          const Vec2 paw_b(pose.paw.x(), -pose.paw.y());
          const Vec2 paw_w = hip_w + r_bw * paw_b;
          if (paw_w.y() <= model.paw_radius() && vel.y() <= 0.0) {
            // Pin at the exact paw point: keeps the leg state continuous
            // through the contact switch (penetration stays sub-substep).
            pair.contact = true;
            pair.pin = paw_w;
          }
        } catch (const InfeasibleConfigError&) {
          // The chain binds at its fold; hold the joints at the stop.
          pair.j1 = j1_prev;
          pair.j2 = j2_prev;
          pair.j1.theta_dot = 0.0;
          pair.j2.theta_dot = 0.0;
        }
        continue;
      }

      const Vec2 rel_b = r_bw.transpose() * (pair.pin - hip_w);
      const Vec2 p_plane(rel_b.x(), -rel_b.y());

      LegPose pose;
      Mat2 jac;
      try {
        pose = inverse_kinematics(geom, p_plane);
        jac = jacobian(geom, pose.theta1, pose.theta2);
      } catch (const std::runtime_error&) {
        pair.contact = false;  // stretched past reach or folded singular
        continue;
      }
      // A joint driven onto its mechanical stop cannot hold the pin.
      if (pose.theta1 < kJointLimitLo || pose.theta1 > kJointLimitHi ||
          pose.theta2 < kJointLimitLo || pose.theta2 > kJointLimitHi) {
        pair.contact = false;
        continue;
      }

      // Joint rates consistent with the pinned paw.
      const Vec2 hip_vel = vel + pitch_rate * (r_bw_d * r_hip);
      const Vec2 rel_b_dot = r_bw.transpose() * (-hip_vel) +
                             pitch_rate * (r_bw_d.transpose() * (pair.pin - hip_w));
      const Vec2 p_plane_dot(rel_b_dot.x(), -rel_b_dot.y());
      const Mat2 jac_inv = jac.inverse();
      const Vec2 theta_dot = jac_inv * p_plane_dot;
      pair.j1.theta = pose.theta1;
      pair.j2.theta = pose.theta2;
      pair.j1.theta_dot = theta_dot.x();
      pair.j2.theta_dot = theta_dot.y();

      // Saturated PD torque plus the knee spring, both legs of the pair.
      // Constraint-driven joints can exceed the motor's no-load speed, where
      // its drive torque collapses.
      const Vec2 tau_pd(
          motor_torque_speed_limited(pair.j1, spec, seq.tau_cap) * pair.torque_scale,
          motor_torque_speed_limited(pair.j2, spec, seq.tau_cap) * pair.torque_scale);
      Vec2 tau = tau_pd;
      if (seq.spring_enabled) {
        tau += spring_torque(geom, pose.theta1, pose.theta2);
      }

      // Virtual work: Q = (dtheta/dpose)^T tau, two legs per pair.
      Eigen::Matrix<double, 2, 3> dp_dpose;
      const Vec2 du_dx = r_bw.transpose() * Vec2(-1.0, 0.0);
      const Vec2 du_dz = r_bw.transpose() * Vec2(0.0, -1.0);
      const Vec2 du_dphi = r_bw_d.transpose() * (pair.pin - hip_w) -
                           r_bw.transpose() * (r_bw_d * r_hip);
      dp_dpose.col(0) = Vec2(du_dx.x(), -du_dx.y());
      dp_dpose.col(1) = Vec2(du_dz.x(), -du_dz.y());
      dp_dpose.col(2) = Vec2(du_dphi.x(), -du_dphi.y());
      const Eigen::Matrix<double, 2, 3> dtheta_dpose = jac_inv * dp_dpose;
      const Eigen::Vector3d q_gen = 2.0 * dtheta_dpose.transpose() * tau;

      // Unilateral ground: release the pair when it stops pushing upward.
      if (q_gen.y() < 0.0) {
        pair.contact = false;
        pair.power_prev = 0.0;
        continue;
      }
      ++in_contact;
      force_sum += q_gen.head<2>();
      torque_sum += q_gen.z();
      fz_total += q_gen.y();

      // Motor work only; the spring keeps its own exact energy ledger.
      const double power = 2.0 * tau_pd.dot(theta_dot);
      metrics.motor_work += 0.5 * (pair.power_prev + power) * dt;
      pair.power_prev = power;
    }

    if (probe) probe(t, pos.y(), fz_total);

    // Airborne only when the ballistic apex clears the standing height;
    // passive micro-bounces fall back into stance.
    if (in_contact == 0 && vel.y() > 0.0 && t > 0.05) {
      const double apex = pos.y() + vel.y() * vel.y() / (2.0 * g);
      if (apex > stand_height + 0.005) {
        airborne = true;
        metrics.liftoff = true;
        metrics.t_liftoff = t;
        metrics.takeoff_rates = Vec3(0.0, pitch_rate, 0.0);
        spring_at_liftoff = spring_stored();
        break;
      }
    }

    // Semi-implicit body update (ballistic while fully unloaded).
    vel += (force_sum / mass + Vec2(0.0, -g)) * dt;
    pitch_rate += torque_sum / pitch_inertia() * dt;
    pos += vel * dt;
    pitch += pitch_rate * dt;
    // Belly contact: a collapsed squat rests on the torso underside.
    const double floor_z = model.torso_half_extents().z() - model.torso_center().z();
    if (pos.y() < floor_z) {
      pos.y() = floor_z;
      vel.y() = std::max(vel.y(), 0.0);
    }
    metrics.pitch_err = std::max(metrics.pitch_err, std::abs(pitch));
    t += dt;
  }

  if (!metrics.liftoff) {
    return metrics;  // h_max stays 0, flagged no-liftoff
  }
  metrics.spring_released = spring_e0 - spring_at_liftoff;

  // Ballistic translation from liftoff.
  const double z0 = pos.y(), x0_takeoff = pos.x();
  const double vz = vel.y(), vx = vel.x();
  const double z_apex = z0 + vz * vz / (2.0 * g);
  metrics.h_max = std::max(z_apex - stand_height, 0.0);
  metrics.h_y = metrics.h_max;
  const double disc = vz * vz + 2.0 * g * std::max(z0 - stand_height, 0.0);
  const double t_land = (vz + std::sqrt(std::max(disc, 0.0))) / g;
  metrics.d_max = std::abs(x0_takeoff + vx * t_land);

  // In-flight attitude: momentum-consistent pitch with the joints still
  // tracking the final setpoints.
  FlightConfig fly;
  fly.physics_hz = seq.physics_hz;
  fly.tau_cap = seq.tau_cap;
  fly.spring_enabled = seq.spring_enabled;
  fly.collision_check_every = 0;

  std::array<double, kNumJoints> joints{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const PairState& p = pairs[leg < 2 ? 0 : 1];
    joints[joint_index(leg, kTheta1)] =
        std::clamp(p.j1.theta, kJointLimitLo, kJointLimitHi);
    joints[joint_index(leg, kTheta2)] =
        std::clamp(p.j2.theta, kJointLimitLo, kJointLimitHi);
  }
  SimState s = make_initial_state(model, SimMode::kFreeFloat,
                                  Quat::from_axis_angle(Vec3::UnitY(), pitch),
                                  joints, Vec3(0.0, pitch_rate, 0.0));
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const PairState& p = pairs[leg < 2 ? 0 : 1];
    s.joints[joint_index(leg, kTheta1)].theta_dot =
        std::clamp(p.j1.theta_dot, -spec.speed_max, spec.speed_max);
    s.joints[joint_index(leg, kTheta2)].theta_dot =
        std::clamp(p.j2.theta_dot, -spec.speed_max, spec.speed_max);
  }
  constrain(model, SimMode::kFreeFloat, s);

  double cmd1, cmd2;
  setpoints_at(seq, schedule_len, cmd1, cmd2);
  std::array<double, kNumJoints> cmd{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    cmd[joint_index(leg, kTheta1)] = cmd1;
    cmd[joint_index(leg, kTheta2)] = cmd2;
  }

  const double fly_duration = std::min(t_land, seq.max_flight_s);
  const int ticks = static_cast<int>(fly_duration * fly.control_hz);
  for (int tick = 0; tick < ticks; ++tick) {
    step_flight(model, fly, s, cmd);
    const double pitch_now = 2.0 * std::atan2(s.q_body.y, s.q_body.w);
    metrics.pitch_err = std::max(metrics.pitch_err, std::abs(pitch_now));
  }
  return metrics;
}

JumpMetrics run_vertical_jump(const RobotModel& model, const JumpSequence& seq,
                              uint64_t seed) {
  return run_jump(model, seq, seed);
}

JumpMetrics run_forward_jump(const RobotModel& model, const JumpSequence& seq,
                             uint64_t seed) {
  return run_jump(model, seq, seed);
}

}  // namespace saltus
