#pragma once

#include <functional>
#include <vector>

#include "saltus/flight.hpp"
#include "saltus/robot.hpp"

namespace saltus {

constexpr double kMarsGravity = 3.721;  // [m/s²]

/// One phase of the jump command schedule: both five-bar motors of every leg
/// track the setpoints, ramped from the previous phase or stepped.
struct JumpPhase {
  double duration = 1.0;  // [s]
  double theta1 = 0.0;    // [rad]
  double theta2 = 0.0;
  bool ramp = true;  // false: step input
};

struct JumpSequence {
  std::vector<JumpPhase> phases;
  double gravity = kMarsGravity;
  double tau_cap = 24.0;       // [N·m]
  bool spring_enabled = true;
  double physics_hz = 800.0;
  double asymmetry_std = 0.0;  // per-pair torque scale noise (s.d.)
  double max_flight_s = 6.0;
};

/// Squat 1 s to the deep fold, hold 0.5 s, step to near-extension.
JumpSequence vertical_jump_sequence();

/// Vertical sequence with a forward-lean phase after the squat (five-bar
/// setpoints shifted by 45 deg in per-motor sign convention) and per-pair
/// takeoff force asymmetry.
JumpSequence forward_jump_sequence();

struct JumpMetrics {
  bool liftoff = false;
  double h_max = 0.0;      // apex body rise above the extended stance [m]
  double h_y = 0.0;        // height at apogee, same reference [m]
  double d_max = 0.0;      // horizontal displacement at touchdown level [m]
  double pitch_err = 0.0;  // peak |pitch| through stance and flight [rad]
  Vec3 takeoff_rates = Vec3::Zero();  // body rates at liftoff [rad/s]
  double t_liftoff = 0.0;
  double motor_work = 0.0;       // integral tau·thetadot over stance [J]
  double spring_released = 0.0;  // cord energy at start minus at liftoff [J]
};

/// Per-substep stance probe: time, body height, total vertical leg force.
using JumpProbeFn = std::function<void(double, double, double)>;

/// Planar sagittal jump: torso rigid body, massless legs transmitting
/// saturated PD plus spring torques through the five-bar Jacobian while the
/// paws are pinned, ballistic flight with momentum-consistent attitude after
/// release.
JumpMetrics run_jump(const RobotModel& model, const JumpSequence& seq,
                     uint64_t seed = 0, const JumpProbeFn& probe = nullptr);

JumpMetrics run_vertical_jump(const RobotModel& model, const JumpSequence& seq,
                              uint64_t seed = 0);
JumpMetrics run_forward_jump(const RobotModel& model, const JumpSequence& seq,
                             uint64_t seed = 0);

}  // namespace saltus
