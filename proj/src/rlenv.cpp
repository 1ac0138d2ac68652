#include "saltus/rlenv.hpp"

#include <cmath>
#include <stdexcept>

namespace saltus {

std::array<double, Observation::kDim> Observation::to_array() const {
  std::array<double, kDim> a{};
  a[0] = q_err.w;
  a[1] = q_err.x;
  a[2] = q_err.y;
  a[3] = q_err.z;
  a[4] = omega.x();
  a[5] = omega.y();
  a[6] = omega.z();
  for (int i = 0; i < kNumJoints; ++i) {
    a[7 + i] = joint_pos[i];
    a[7 + kNumJoints + i] = joint_vel[i];
  }
  return a;
}

Observation Observation::from_array(const std::array<double, kDim>& a) {
  Observation o;
  o.q_err = Quat{a[0], a[1], a[2], a[3]};
  o.omega = Vec3(a[4], a[5], a[6]);
  for (int i = 0; i < kNumJoints; ++i) {
    o.joint_pos[i] = a[7 + i];
    o.joint_vel[i] = a[7 + kNumJoints + i];
  }
  return o;
}

void RewardParams::validate() const {
  if (nu_q <= 0.0 || mu_q <= 0.0 || nu_omega <= 0.0 || mu_omega <= 0.0) {
    throw std::invalid_argument("RewardParams: tuning parameters must be > 0");
  }
  if (episode_s <= 0.0 || angle_gate <= 0.0) {
    throw std::invalid_argument("RewardParams: bad gate or episode length");
  }
}

Observation observe(const SimState& s, const Quat& q_ref,
                    const NoiseSpec* noise, std::mt19937_64& rng) {
  Observation o;
  o.q_err = quat_error(q_ref, s.q_body);
  o.omega = s.omega_body;
  for (int i = 0; i < kNumJoints; ++i) {
    o.joint_pos[i] = s.joints[i].theta;
    o.joint_vel[i] = s.joints[i].theta_dot;
  }
  if (noise) {
    std::normal_distribution<double> n(0.0, 1.0);
    const Vec3 rotvec(noise->orientation_std * n(rng),
                      noise->orientation_std * n(rng),
                      noise->orientation_std * n(rng));
    o.q_err = quat_mul(o.q_err, Quat::exp_map(rotvec)).normalized().canonical();
    for (int i = 0; i < 3; ++i) o.omega[i] += noise->rate_std * n(rng);
    for (int i = 0; i < kNumJoints; ++i) {
      o.joint_pos[i] += noise->joint_pos_std * n(rng);
      o.joint_vel[i] += noise->joint_vel_std * n(rng);
    }
  }
  return o;
}

std::array<double, kNumJoints> map_action(
    const std::array<double, kNumJoints>& raw) {
  std::array<double, kNumJoints> cmd{};
  for (int i = 0; i < kNumJoints; ++i) {
    if (!std::isfinite(raw[i])) {
      throw std::invalid_argument("map_action: non-finite action");
    }
    const double clipped = std::clamp(raw[i], -1.0, 1.0);
    cmd[i] = kJointLimitLo + 0.5 * (clipped + 1.0) * (kJointLimitHi - kJointLimitLo);
  }
  return cmd;
}

RewardResult reward(const SimState& s, const Quat& q_ref, const RewardParams& p) {
  RewardResult r;
  r.angle_err = quat_angle(quat_error(q_ref, s.q_body));
  r.r_q = p.nu_q * std::exp(-p.mu_q * r.angle_err * r.angle_err);
  if (std::abs(r.angle_err) > p.angle_gate) {
    r.r_omega = -p.nu_omega * std::exp(-p.mu_omega * s.omega_body.squaredNorm()) + 1.0;
  } else {
    r.r_omega = 10.0;
  }
  r.total = r.r_q + r.r_omega;
  return r;
}

Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Quat{n(rng), n(rng), n(rng), n(rng)}.normalized().canonical();
}

AttitudeEnv::AttitudeEnv(std::shared_ptr<const RobotModel> model, EnvConfig cfg,
                         uint64_t seed)
    : model_(std::move(model)), cfg_(std::move(cfg)), rng_(seed) {
  cfg_.reward_params.validate();
  cfg_.flight.validate();
  flight_ = cfg_.flight;
}

Observation AttitudeEnv::reset() {
  const Quat q0 = (cfg_.training || cfg_.eval_uniform_spawn)
                      ? random_rotation(rng_)
                      : Quat::identity();

  std::array<double, kNumJoints> joints{};
  if (cfg_.spawn_joints) {
    joints = *cfg_.spawn_joints;
    if (model_->self_collision(joints).colliding) {
      throw std::runtime_error("AttitudeEnv::reset: configured spawn collides");
    }
  } else {
    std::uniform_real_distribution<double> u(kJointLimitLo, kJointLimitHi);
    bool found = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (auto& v : joints) v = u(rng_);
      bool feasible = true;
      for (int leg = 0; leg < kNumLegs && feasible; ++leg) {
        try {
          forward_kinematics(model_->leg_geometry(),
                             joints[joint_index(leg, kTheta1)],
                             joints[joint_index(leg, kTheta2)]);
        } catch (const InfeasibleConfigError&) {
          feasible = false;
        }
      }
      if (feasible && !model_->self_collision(joints).colliding) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error(
          "AttitudeEnv::reset: no collision-free spawn in 100 draws");
    }
  }

  state_ = make_initial_state(*model_, cfg_.mode, q0, joints);
  q_ref_ = cfg_.training ? random_rotation(rng_)
                         : cfg_.eval_reference.normalized().canonical();

  flight_ = cfg_.flight;
  if (cfg_.training) {
    std::uniform_real_distribution<double> g(1.0 - cfg_.noise.gain_range,
                                             1.0 + cfg_.noise.gain_range);
    for (int i = 0; i < kNumJoints; ++i) {
      flight_.kp_scale[i] = g(rng_);
      flight_.kd_scale[i] = g(rng_);
    }
  }

  step_count_ = 0;
  done_ = false;
  return observation();
}

Observation AttitudeEnv::observation() {
  return observe(state_, q_ref_, cfg_.training ? &cfg_.noise : nullptr, rng_);
}

AttitudeEnv::StepOut AttitudeEnv::step(const std::array<double, kNumJoints>& action) {
  if (done_) {
    throw std::logic_error("AttitudeEnv::step: episode is done, reset first");
  }
  std::array<double, kNumJoints> cmd = map_action(action);
  if (cfg_.cmd_clips) {
    for (int i = 0; i < kNumJoints; ++i) {
      cmd[i] = std::clamp(cmd[i], (*cfg_.cmd_clips)[i].first,
                          (*cfg_.cmd_clips)[i].second);
    }
  }

  const StepResult sr = step_flight(*model_, flight_, state_, cmd);
  ++step_count_;

  StepOut out;
  const RewardResult r = reward(state_, q_ref_, cfg_.reward_params);
  out.reward = r.total;
  out.angle_err = r.angle_err;
  out.collided = sr.collided;
  if (sr.collided) {
    out.reward += cfg_.reward_params.collision_penalty;
    done_ = true;
  } else if (step_count_ >= cfg_.max_steps()) {
    done_ = true;
  }
  out.done = done_;
  out.obs = observation();
  return out;
}

}  // namespace saltus
