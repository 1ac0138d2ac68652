#pragma once

#include <array>
#include <optional>

#include "saltus/robot.hpp"
#include "saltus/servo.hpp"

namespace saltus {

/// Mounting of the floating base during flight-phase simulation.
///   free_float: unconstrained, zero external torque about the com.
///   rod_*:      spins about a single body axis fixed to the world; gravity
///               torques about the rod apply.
///   rope:       free yaw, restoring pendulum torque on roll/pitch.
enum class SimMode { kFreeFloat, kRodRoll, kRodPitch, kRodYaw, kRope };

struct FlightConfig {
  double physics_hz = 800.0;  // substep rate, must be >= 400
  double control_hz = 50.0;
  double tau_cap = 8.0;       // reorientation torque derating [N·m]
  bool spring_enabled = false;
  double rig_gravity = 9.81;  // rod/rope test rigs run under Earth gravity
  double rope_stiffness = 2.0;   // [N·m/rad] on roll and pitch
  double rope_damping = 0.1;     // [N·m·s/rad]
  int collision_check_every = 4; // substeps between proxy checks (0 = off)

  /// Per-joint PD gain scaling (domain randomization hooks).
  std::array<double, kNumJoints> kp_scale = uniform_scale();
  std::array<double, kNumJoints> kd_scale = uniform_scale();

  static std::array<double, kNumJoints> uniform_scale() {
    std::array<double, kNumJoints> s;
    s.fill(1.0);
    return s;
  }

  void validate() const;
  double substep_dt() const { return 1.0 / physics_hz; }
  int substeps_per_control() const;
};

/// Floating-base flight state.
struct SimState {
  Quat q_body;                 // body -> inertial
  Vec3 omega_body = Vec3::Zero();
  std::array<JointState, kNumJoints> joints{};
  double time = 0.0;
  SimMode mode = SimMode::kFreeFloat;

  /// Conserved (free float) or externally driven (rope) total angular
  /// momentum about the system com, inertial frame.
  Vec3 ang_momentum_inertial = Vec3::Zero();

  /// Rod-mode internal coordinates: rotation angle about the rod axis and
  /// angular momentum component along it.
  double rod_angle = 0.0;
  double rod_momentum = 0.0;

  std::array<double, kNumJoints> joint_positions() const;
  std::array<double, kNumJoints> joint_velocities() const;
};

/// Locked inertia about the system com, internal momentum and com position,
/// all in the body frame.
struct MomentumTerms {
  Mat3 locked_inertia = Mat3::Zero();
  Vec3 internal_momentum = Vec3::Zero();
  Vec3 com = Vec3::Zero();
  double mass = 0.0;
};

MomentumTerms assemble_momentum(const RobotModel& model,
                                const std::array<double, kNumJoints>& q,
                                const std::array<double, kNumJoints>& qdot);

/// Total angular momentum about the system com, inertial frame.
Vec3 total_angular_momentum(const RobotModel& model, const SimState& s);

/// Body axis a rod mode spins about.
Vec3 rod_axis(SimMode mode);

/// Normalize a state to its mode invariants: project omega and the
/// orientation onto the rod axis (rod modes) and resync the stored momentum
/// from the current state. Free float and rope leave pose and rates intact.
void constrain(const RobotModel& model, SimMode mode, SimState& s);

/// Build a mode-consistent initial state with the given joint positions;
/// all velocities zero unless omega is supplied.
SimState make_initial_state(const RobotModel& model, SimMode mode,
                            const Quat& q0,
                            const std::array<double, kNumJoints>& joints,
                            const Vec3& omega = Vec3::Zero());

struct StepResult {
  bool collided = false;
  double collision_depth = 0.0;
};

/// Advance one control tick (1/control_hz) of flight: joints track
/// theta_cmd through the servo model at the physics substep rate while the
/// base rotates as the momentum-consistent response. Returns a collision
/// event (state frozen at the colliding substep) when the proxies touch.
StepResult step_flight(const RobotModel& model, const FlightConfig& cfg,
                       SimState& s,
                       const std::array<double, kNumJoints>& theta_cmd);

/// Advance the base orientation only, with joint trajectories prescribed
/// directly (midpoint joint state over the substep). Used by playback-style
/// checks and by the jump flight phase.
void advance_base(const RobotModel& model, SimState& s,
                  const std::array<double, kNumJoints>& q_mid,
                  const std::array<double, kNumJoints>& qdot_mid, double dt);

}  // namespace saltus
