#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "saltus/flight.hpp"
#include "saltus/primitives.hpp"
#include "test_util.hpp"

using namespace saltus;

namespace {
constexpr double kDeg = M_PI / 180.0;

RobotModel design_model() { return RobotModel::build(DesignParams::baseline()); }

FlightConfig flight_cfg() {
  FlightConfig cfg;
  cfg.collision_check_every = 0;  // pose fuzzing may pass through contact
  return cfg;
}

std::array<double, kNumJoints> safe_pose() {
  std::array<double, kNumJoints> q{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    q[joint_index(leg, kTheta1)] = 30 * kDeg;
    q[joint_index(leg, kTheta2)] = 30 * kDeg;
  }
  return q;
}

// Random in-range joint commands.
std::array<double, kNumJoints> random_cmd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(kJointLimitLo + 2 * kDeg,
                                           kJointLimitHi - 2 * kDeg);
  std::array<double, kNumJoints> cmd{};
  for (auto& v : cmd) v = u(rng);
  return cmd;
}
}  // namespace

TEST_CASE("holding still keeps the body orientation constant") {
  const RobotModel model = design_model();
  const FlightConfig cfg = flight_cfg();
  SimState s = make_initial_state(model, SimMode::kFreeFloat,
                                  Quat::from_axis_angle(Vec3::UnitY(), 0.4),
                                  safe_pose());
  const Quat q0 = s.q_body;
  const auto hold = s.joint_positions();
  for (int i = 0; i < 50; ++i) {
    step_flight(model, cfg, s, hold);
  }
  CHECK(quat_distance(q0, s.q_body) < 1e-9);
  CHECK(s.omega_body.norm() < 1e-12);
}

TEST_CASE("rigid robot spinning reduces to R I omega") {
  const RobotModel model = design_model();
  auto rng = test::make_rng(5);
  const Quat q = test::random_unit_quat(rng);
  const Vec3 omega = test::random_vec3(rng, 2.0);
  SimState s = make_initial_state(model, SimMode::kFreeFloat, q, safe_pose(), omega);

  const MomentumTerms t =
      assemble_momentum(model, s.joint_positions(), s.joint_velocities());
  const Vec3 expect = q.rotate(t.locked_inertia * omega);
  CHECK((total_angular_momentum(model, s) - expect).norm() < 1e-12);

  // Zero rates: zero momentum.
  SimState rest = make_initial_state(model, SimMode::kFreeFloat, q, safe_pose());
  CHECK(total_angular_momentum(model, rest).norm() == doctest::Approx(0.0));
}

TEST_CASE("total angular momentum matches a point-cloud oracle") {
  const RobotModel model = design_model();
  auto rng = test::make_rng(23);
  std::uniform_real_distribution<double> urate(-4.0, 4.0);

  for (int trial = 0; trial < 10; ++trial) {
    SimState s;
    s.q_body = test::random_unit_quat(rng);
    s.omega_body = test::random_vec3(rng, 2.0);
    std::array<double, kNumJoints> q{};
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const auto [t1, t2] = test::random_feasible_pose(model.leg_geometry(), rng);
      q[joint_index(leg, kHip)] = urate(rng) * 0.2;
      q[joint_index(leg, kTheta1)] = t1;
      q[joint_index(leg, kTheta2)] = t2;
    }
    std::array<double, kNumJoints> qd{};
    for (auto& v : qd) v = urate(rng);
    for (int i = 0; i < kNumJoints; ++i) {
      s.joints[i].theta = q[i];
      s.joints[i].theta_dot = qd[i];
    }

    // Cloud of body + leg points; velocities from joint motion plus base
    // rotation about the system com.
    std::vector<Vec3> pts;
    std::vector<Vec3> vel;
    std::vector<double> mass;
    const double h = 1e-6;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const int j0 = joint_index(leg, kHip);
      const auto cloud = [&](double scale) {
        return test::leg_point_cloud(model, leg, q[j0] + scale * qd[j0],
                                     q[j0 + 1] + scale * qd[j0 + 1],
                                     q[j0 + 2] + scale * qd[j0 + 2], 100);
      };
      const auto now = cloud(0.0), plus = cloud(h), minus = cloud(-h);
      for (size_t i = 0; i < now.points.size(); ++i) {
        pts.push_back(now.points[i]);
        vel.push_back((plus.points[i] - minus.points[i]) / (2 * h));
        mass.push_back(now.masses[i]);
      }
    }
    // Torso block: sample the body inertia as a rigid cloud (com + spread
    // matching its moment via three dumbbells along principal axes).
    const Inertia& body = model.body_inertia();
    Eigen::SelfAdjointEigenSolver<Mat3> es(body.moment);
    for (int axis = 0; axis < 3; ++axis) {
      // Point pair along each principal axis reproducing the moment split.
      const Vec3 dir = es.eigenvectors().col(axis);
      const Vec3 ev = es.eigenvalues();
      const double sum = 0.5 * (ev((axis + 1) % 3) + ev((axis + 2) % 3) - ev(axis));
      const double m6 = body.mass / 6.0;
      const double d = std::sqrt(std::max(sum, 0.0) / (2.0 * m6));
      for (double sign : {-1.0, 1.0}) {
        pts.push_back(body.com + sign * d * dir);
        vel.push_back(Vec3::Zero());
        mass.push_back(m6);
      }
    }

    double total = 0.0;
    Vec3 com = Vec3::Zero();
    for (size_t i = 0; i < pts.size(); ++i) {
      total += mass[i];
      com += mass[i] * pts[i];
    }
    com /= total;
    Vec3 l_body = Vec3::Zero();
    for (size_t i = 0; i < pts.size(); ++i) {
      const Vec3 r = pts[i] - com;
      l_body += mass[i] * r.cross(s.omega_body.cross(r) + vel[i]);
    }
    const Vec3 oracle = s.q_body.rotate(l_body);
    const Vec3 got = total_angular_momentum(model, s);
    CHECK((got - oracle).norm() < 0.02 * std::max(0.05, oracle.norm()));
  }
}

TEST_CASE("free float conserves momentum through random maneuvers") {
  const RobotModel model = design_model();
  const FlightConfig cfg = flight_cfg();
  auto rng = test::make_rng(314);

  for (int episode = 0; episode < 5; ++episode) {
    SimState s = make_initial_state(model, SimMode::kFreeFloat,
                                    test::random_unit_quat(rng), safe_pose());
    const Vec3 l0 = total_angular_momentum(model, s);
    CHECK(l0.norm() < 1e-12);

    double peak_internal = 0.0;
    double worst = 0.0;
    auto cmd = random_cmd(rng);
    for (int tick = 0; tick < 300; ++tick) {  // 6 s at 50 Hz
      if (tick % 25 == 0) cmd = random_cmd(rng);
      step_flight(model, cfg, s, cmd);
      const MomentumTerms t =
          assemble_momentum(model, s.joint_positions(), s.joint_velocities());
      peak_internal = std::max(peak_internal, t.internal_momentum.norm());
      worst = std::max(worst,
                       (total_angular_momentum(model, s) - l0).norm());
    }
    REQUIRE(peak_internal > 1e-3);
    CHECK(worst / peak_internal < 1e-4);
    // The maneuvers must actually rotate the body.
    CHECK(quat_angle(s.q_body) >= 0.0);
  }
}

TEST_CASE("cyclic leg motion produces net rotation with zero momentum") {
  const RobotModel model = design_model();
  const FlightConfig cfg = flight_cfg();
  SimState s = make_initial_state(model, SimMode::kFreeFloat, Quat::identity(),
                                  safe_pose());

  // Asymmetric paddle: swing hips with legs extended, return retracted.
  const auto cycle_cmd = [&](double t) {
    std::array<double, kNumJoints> cmd = safe_pose();
    const double u = std::fmod(t, 1.0);
    double hip, knee;
    if (u < 0.4) {
      hip = -20 * kDeg + (u / 0.4) * 120 * kDeg;
      knee = 20 * kDeg;
    } else if (u < 0.5) {
      hip = 100 * kDeg;
      knee = 20 * kDeg + ((u - 0.4) / 0.1) * 90 * kDeg;
    } else if (u < 0.9) {
      hip = 100 * kDeg - ((u - 0.5) / 0.4) * 120 * kDeg;
      knee = 110 * kDeg;
    } else {
      hip = -20 * kDeg;
      knee = 110 * kDeg - ((u - 0.9) / 0.1) * 90 * kDeg;
    }
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double sign = (leg % 2 == 0) ? 1.0 : -1.0;
      cmd[joint_index(leg, kHip)] =
          sign > 0 ? hip : (80 * kDeg - hip);  // mirrored sweep
      cmd[joint_index(leg, kTheta1)] = knee;
      cmd[joint_index(leg, kTheta2)] = knee;
    }
    return cmd;
  };

  for (int tick = 0; tick < 300; ++tick) {
    step_flight(model, cfg, s, cycle_cmd(tick / 50.0));
  }
  CHECK((total_angular_momentum(model, s)).norm() < 1e-6);
  // Geometric phase: net rotation despite zero momentum.
  CHECK(quat_angle(s.q_body) > 2 * kDeg);
}

TEST_CASE("rod modes keep the locked axes identically zero") {
  const RobotModel model = design_model();
  FlightConfig cfg = flight_cfg();
  auto rng = test::make_rng(77);

  for (SimMode mode : {SimMode::kRodRoll, SimMode::kRodPitch, SimMode::kRodYaw}) {
    SimState s = make_initial_state(model, mode, Quat::identity(), safe_pose());
    auto cmd = random_cmd(rng);
    for (int tick = 0; tick < 100; ++tick) {
      if (tick % 20 == 0) cmd = random_cmd(rng);
      step_flight(model, cfg, s, cmd);
    }
    const Vec3 a = rod_axis(mode);
    for (int k = 0; k < 3; ++k) {
      if (a[k] != 0.0) continue;
      CHECK(s.omega_body[k] == 0.0);
      const double quat_comp = (k == 0) ? s.q_body.x
                               : (k == 1) ? s.q_body.y
                                          : s.q_body.z;
      CHECK(quat_comp == 0.0);  // bitwise zero off-axis
    }
    // The rig actually moved.
    CHECK(std::abs(s.rod_angle) > 1e-4);
  }
}

TEST_CASE("constrain projects rod rates and passes free float through") {
  const RobotModel model = design_model();
  SimState s = make_initial_state(model, SimMode::kFreeFloat, Quat::identity(),
                                  safe_pose(), Vec3(1.0, 2.0, 3.0));
  SimState free_copy = s;
  constrain(model, SimMode::kFreeFloat, free_copy);
  CHECK((free_copy.omega_body - s.omega_body).norm() == 0.0);
  CHECK(quat_distance(free_copy.q_body, s.q_body) == 0.0);

  SimState rod = s;
  constrain(model, SimMode::kRodPitch, rod);
  CHECK(rod.omega_body.x() == 0.0);
  CHECK(rod.omega_body.y() == doctest::Approx(2.0));
  CHECK(rod.omega_body.z() == 0.0);
}

TEST_CASE("rope mode damps a small roll offset like a pendulum") {
  const RobotModel model = design_model();
  FlightConfig cfg = flight_cfg();
  const double roll0 = 8 * kDeg;
  SimState s = make_initial_state(model, SimMode::kRope,
                                  Quat::from_axis_angle(Vec3::UnitX(), roll0),
                                  safe_pose());
  const auto hold = s.joint_positions();

  // Reference: linear damped oscillator I rddot = -k r - c rdot.
  const MomentumTerms t =
      assemble_momentum(model, s.joint_positions(), s.joint_velocities());
  const double inertia = Vec3::UnitX().dot(t.locked_inertia * Vec3::UnitX());
  double r = roll0, rd = 0.0;
  const double dt = cfg.substep_dt();

  double worst = 0.0;
  for (int tick = 0; tick < 250; ++tick) {
    step_flight(model, cfg, s, hold);
    for (int i = 0; i < cfg.substeps_per_control(); ++i) {
      const double rdd = (-cfg.rope_stiffness * r - cfg.rope_damping * rd) / inertia;
      rd += rdd * dt;
      r += rd * dt;
    }
    double roll, pitch;
    roll = std::atan2(2.0 * (s.q_body.w * s.q_body.x + s.q_body.y * s.q_body.z),
                      1.0 - 2.0 * (s.q_body.x * s.q_body.x + s.q_body.y * s.q_body.y));
    (void)pitch;
    worst = std::max(worst, std::abs(roll - r));
  }
  CHECK(worst < 0.35 * roll0);  // same oscillator to first order
  // Oscillation decays toward hanging.
  double roll_end = std::atan2(
      2.0 * (s.q_body.w * s.q_body.x + s.q_body.y * s.q_body.z),
      1.0 - 2.0 * (s.q_body.x * s.q_body.x + s.q_body.y * s.q_body.y));
  CHECK(std::abs(roll_end) < roll0);
}

TEST_CASE("halving dt changes the final orientation by less than 0.1 degree") {
  const RobotModel model = design_model();
  const Primitive p = make_primitive(Axis::kRoll, model);
  const auto run = [&](double hz) {
    FlightConfig cfg = flight_cfg();
    cfg.physics_hz = hz;
    SimState s = make_initial_state(model, SimMode::kFreeFloat, Quat::identity(),
                                    primitive_setpoints(p, 0.0));
    for (int tick = 0; tick < 150; ++tick) {
      step_flight(model, cfg, s, primitive_setpoints(p, tick / 50.0));
    }
    return s.q_body;
  };
  const Quat a = run(800.0);
  const Quat b = run(1600.0);
  CHECK(quat_distance(a, b) < 0.1 * kDeg);
}

TEST_CASE("reversed joint playback returns the body to its start") {
  const RobotModel model = design_model();
  auto rng = test::make_rng(99);

  SimState s = make_initial_state(model, SimMode::kFreeFloat, Quat::identity(),
                                  safe_pose());
  const Quat q0 = s.q_body;

  // Prescribed smooth joint trajectory (midpoint-sampled playback).
  const double dt = 1.0 / 800.0;
  const double T = 2.0;
  const auto traj = [&](double t) {
    std::array<double, kNumJoints> q{};
    for (int i = 0; i < kNumJoints; ++i) {
      const double phase = 0.7 * i;
      q[i] = 30 * kDeg + 25 * kDeg * std::sin(2 * M_PI * t / T + phase);
    }
    return q;
  };
  const auto rate = [&](double t) {
    std::array<double, kNumJoints> qd{};
    for (int i = 0; i < kNumJoints; ++i) {
      const double phase = 0.7 * i;
      qd[i] = 25 * kDeg * (2 * M_PI / T) * std::cos(2 * M_PI * t / T + phase);
    }
    return qd;
  };

  const int n = static_cast<int>(T / dt);
  for (int i = 0; i < n; ++i) {
    const double tm = (i + 0.5) * dt;
    advance_base(model, s, traj(tm), rate(tm), dt);
  }
  // Forward leg motion rotated the body.
  REQUIRE(quat_distance(q0, s.q_body) > 1 * kDeg);
  for (int i = n - 1; i >= 0; --i) {
    const double tm = (i + 0.5) * dt;
    auto qd = rate(tm);
    for (auto& v : qd) v = -v;
    advance_base(model, s, traj(tm), qd, dt);
  }
  CHECK(quat_distance(q0, s.q_body) < 0.05 * kDeg);
}
