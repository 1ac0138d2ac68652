#pragma once

#include <memory>
#include <optional>
#include <random>

#include "saltus/flight.hpp"

namespace saltus {

/// Policy observation: orientation error quaternion, body rates and joint
/// state. Layout (31 values): [qw qx qy qz | wx wy wz | 12 joint pos |
/// 12 joint vel].
struct Observation {
  static constexpr int kDim = 4 + 3 + kNumJoints + kNumJoints;

  Quat q_err;
  Vec3 omega = Vec3::Zero();
  std::array<double, kNumJoints> joint_pos{};
  std::array<double, kNumJoints> joint_vel{};

  std::array<double, kDim> to_array() const;
  static Observation from_array(const std::array<double, kDim>& a);
};

struct RewardParams {
  double nu_q = 5.0;
  double mu_q = 2.0;
  double nu_omega = 2.0;
  double mu_omega = 0.1;
  double collision_penalty = -15.0;
  double angle_gate = 0.1;  // [rad]
  double episode_s = 6.0;

  void validate() const;
};

/// Training-time observation noise and model randomization.
struct NoiseSpec {
  double orientation_std = 3.0 * M_PI / 180.0;   // [rad]
  double rate_std = 10.0 * M_PI / 180.0;         // [rad/s]
  double joint_pos_std = 3.0 * M_PI / 180.0;     // [rad]
  double joint_vel_std = 20.0 * M_PI / 180.0;    // [rad/s]
  double gain_range = 0.5;                       // PD gains scaled ±50%
};

/// Observation of a state against a reference. Orientation noise applies as
/// a random small rotation on the error quaternion; rate and joint noise are
/// additive. Pass noise = nullptr (evaluation) for a deterministic
/// observation.
Observation observe(const SimState& s, const Quat& q_ref,
                    const NoiseSpec* noise, std::mt19937_64& rng);

/// Eq.-style action mapping: clip to [-1, 1], then affine to the joint
/// limits. Throws std::invalid_argument on non-finite input.
std::array<double, kNumJoints> map_action(const std::array<double, kNumJoints>& raw);

struct RewardResult {
  double total = 0.0;
  double r_q = 0.0;
  double r_omega = 0.0;
  double angle_err = 0.0;  // [rad]
};

/// Attitude reward: r_q = nu_q exp(-mu_q theta^2) plus the gated rate term
/// (+10 inside the angle gate). The collision penalty is added by the
/// environment on terminal contact.
RewardResult reward(const SimState& s, const Quat& q_ref, const RewardParams& p);

/// Uniformly distributed rotation.
Quat random_rotation(std::mt19937_64& rng);

struct EnvConfig {
  FlightConfig flight;
  RewardParams reward_params;
  NoiseSpec noise;
  SimMode mode = SimMode::kFreeFloat;
  bool training = true;  // noise, gain randomization, random reference
  Quat eval_reference;   // fixed reference when not training
  bool eval_uniform_spawn = true;
  std::optional<std::array<double, kNumJoints>> spawn_joints;
  /// Optional per-joint command clamps (rod-rig workspace restrictions).
  std::optional<std::array<std::pair<double, double>, kNumJoints>> cmd_clips;

  int max_steps() const {
    return static_cast<int>(std::lround(reward_params.episode_s * flight.control_hz));
  }
};

/// One attitude-control episode environment over the flight dynamics.
class AttitudeEnv {
 public:
  AttitudeEnv(std::shared_ptr<const RobotModel> model, EnvConfig cfg,
              uint64_t seed);

  /// Respawn: orientation uniform on SO(3), joints uniform in their limits
  /// (rejection-sampled collision free), all velocities zero, PD gains
  /// refreshed. Throws std::runtime_error after 100 colliding draws.
  Observation reset();

  struct StepOut {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    bool collided = false;
    double angle_err = 0.0;
  };

  /// One 1/control_hz tick. Throws std::logic_error when already done.
  StepOut step(const std::array<double, kNumJoints>& action);

  const SimState& state() const { return state_; }
  const Quat& reference() const { return q_ref_; }
  void set_reference(const Quat& q) { q_ref_ = q.normalized().canonical(); }
  bool done() const { return done_; }
  int steps() const { return step_count_; }
  const RobotModel& model() const { return *model_; }
  Observation observation();

 private:
  std::shared_ptr<const RobotModel> model_;
  EnvConfig cfg_;
  std::mt19937_64 rng_;
  SimState state_;
  Quat q_ref_;
  FlightConfig flight_;  // per-episode gains applied
  int step_count_ = 0;
  bool done_ = true;
};

}  // namespace saltus
