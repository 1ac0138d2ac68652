#pragma once

#include <functional>

#include "saltus/flight.hpp"

namespace saltus {

enum class Axis { kRoll, kPitch, kYaw };

const char* axis_name(Axis axis);

/// Open-loop paddle-stroke schedule for one reorientation axis: the power
/// half-cycle sweeps extended legs one way, the return half-cycle brings
/// retracted legs back. Roll strokes the hips, pitch strokes the paws
/// fore-aft through the five-bar, yaw strokes left and right sides in
/// opposition.
struct Primitive {
  Axis axis = Axis::kRoll;
  double period = 1.0;  // [s]
  bool mirrored = false;  // phase-reversed cycle, rotates the other way

  // Stroke amplitudes [rad]; defaults fit the baseline workspace and are
  // rescaled per design by make_primitive. Retraction stays shallow enough
  // that folded knees clear the torso slab at any hip angle.
  double hip_lo = -15.0 * M_PI / 180.0;
  double hip_hi = 115.0 * M_PI / 180.0;
  double theta_extended = 20.0 * M_PI / 180.0;
  double theta_retracted = 75.0 * M_PI / 180.0;
  double delta_max = 42.0 * M_PI / 180.0;  // fore-aft paw stroke
};

/// Primitive tuned to a model's feasible workspace for the given axis.
Primitive make_primitive(Axis axis, const RobotModel& model);

/// Joint setpoints at time t; continuous in phase and exactly periodic.
std::array<double, kNumJoints> primitive_setpoints(const Primitive& p, double t);

struct ReorientationResult {
  double theta_achieved = 0.0;  // net rotation about the axis [rad]
  bool collided = false;
  double duration = 0.0;
};

/// Per-control-tick trace callback (time, state).
using TraceFn = std::function<void(double, const SimState&)>;

/// Zero-gravity, zero-momentum primitive run; net body rotation about the
/// primitive axis after `duration` seconds. Self-collision scores zero and
/// flags the run.
ReorientationResult run_reorientation(const RobotModel& model, Axis axis,
                                      double duration = 5.0,
                                      const FlightConfig& cfg = {},
                                      const TraceFn& trace = nullptr);

/// As above with an explicit primitive (mirrored runs, sweeps).
ReorientationResult run_primitive(const RobotModel& model, const Primitive& p,
                                  double duration, const FlightConfig& cfg = {},
                                  const TraceFn& trace = nullptr);

}  // namespace saltus
