#pragma once

#include <random>

#include "saltus/geom.hpp"
#include "saltus/robot.hpp"

namespace saltus::test {

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q{n(rng), n(rng), n(rng), n(rng)};
  return q.normalized().canonical();
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

/// Random feasible non-singular 5-bar pose within the joint limits.
inline std::pair<double, double> random_feasible_pose(const LegGeometry& g,
                                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(kJointLimitLo, kJointLimitHi);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double t1 = u(rng);
    const double t2 = u(rng);
    try {
      forward_kinematics(g, t1, t2);
      jacobian(g, t1, t2);
      return {t1, t2};
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  throw std::runtime_error("random_feasible_pose: none found");
}

/// Uniformly spaced point cloud over the leg's links and paw, with per-point
/// masses matching the model's link masses. Independent discretization oracle
/// for inertia and momentum checks.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> masses;
};

inline PointCloud leg_point_cloud(const RobotModel& model, int leg, double hip,
                                  double t1, double t2, int per_link) {
  const LegPoints pts = model.leg_points(leg, hip, t1, t2);
  PointCloud pc;
  auto add_rod = [&](const Vec3& a, const Vec3& b, double mass) {
    for (int i = 0; i < per_link; ++i) {
      const double s = (i + 0.5) / per_link;
      pc.points.push_back(a + s * (b - a));
      pc.masses.push_back(mass / per_link);
    }
  };
  add_rod(pts.motor1, pts.knee1, model.upper_link_mass());
  add_rod(pts.motor2, pts.knee2, model.upper_link_mass());
  add_rod(pts.knee1, pts.paw, model.lower_link_mass());
  add_rod(pts.knee2, pts.paw, model.lower_link_mass());
  pc.points.push_back(pts.paw);
  pc.masses.push_back(model.paw_mass());
  return pc;
}

}  // namespace saltus::test
