#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "saltus/geom.hpp"
#include "test_util.hpp"

using namespace saltus;

TEST_CASE("quat_error identities") {
  const Quat id = Quat::identity();
  const Quat e = quat_error(id, id);
  CHECK(e.w == doctest::Approx(1.0));
  CHECK(quat_angle(e) == doctest::Approx(0.0));

  const Quat yaw90 = Quat::from_axis_angle(Vec3::UnitZ(), M_PI / 2.0);
  const Quat e2 = quat_error(id, yaw90);
  CHECK(e2.w == doctest::Approx(std::sqrt(0.5)));
  CHECK(e2.z == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("quat_error round trip against direct multiplication") {
  auto rng = test::make_rng(42);
  for (int i = 0; i < 500; ++i) {
    const Quat q_ref = test::random_unit_quat(rng);
    const Quat q_body = test::random_unit_quat(rng);
    const Quat e = quat_error(q_ref, q_body);
    const Quat back = quat_mul(q_ref, e);
    // Same rotation up to quaternion sign.
    const double dot = std::abs(back.w * q_body.w + back.x * q_body.x +
                                back.y * q_body.y + back.z * q_body.z);
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quat_error rejects non-finite input") {
  Quat bad = Quat::identity();
  bad.x = std::nan("");
  CHECK_THROWS_AS(quat_error(bad, Quat::identity()), std::invalid_argument);
}

TEST_CASE("quat_angle basics") {
  CHECK(quat_angle(Quat::identity()) == doctest::Approx(0.0));
  const Quat half{std::sqrt(0.5), 0, 0, std::sqrt(0.5)};
  CHECK(quat_angle(half) == doctest::Approx(M_PI / 2.0));
  const Quat anti{0.0, 1.0, 0.0, 0.0};
  CHECK(quat_angle(anti) == doctest::Approx(M_PI));

  CHECK_THROWS_AS(quat_angle(Quat{1.0 + 1e-6, 0, 0, 0}), std::invalid_argument);
  CHECK(quat_angle(Quat{1.0 + 1e-10, 0, 0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("integrate_quat closed forms") {
  const Quat q0 = Quat::from_axis_angle(Vec3::UnitX(), 0.3);
  const Quat same = integrate_quat(q0, Vec3::Zero(), 0.01);
  CHECK(quat_distance(q0, same) == doctest::Approx(0.0));

  const Quat yawed = integrate_quat(Quat::identity(), Vec3(0, 0, M_PI), 0.5);
  const Quat expect = Quat::from_axis_angle(Vec3::UnitZ(), M_PI / 2.0);
  CHECK(quat_distance(yawed, expect) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("integrate_quat matches closed-form rotation over 1000 small steps") {
  auto rng = test::make_rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 omega = test::random_vec3(rng, 3.0);
    Quat q = test::random_unit_quat(rng);
    const Quat q0 = q;
    for (int i = 0; i < 1000; ++i) {
      q = integrate_quat(q, omega, 1e-3);
    }
    const Quat expect = quat_mul(q0, Quat::exp_map(omega * 1.0)).canonical();
    CHECK(quat_distance(q, expect) < 1e-9);
  }
}

TEST_CASE("integrate_quat preserves norm over 1e5 steps") {
  auto rng = test::make_rng(11);
  Quat q = test::random_unit_quat(rng);
  const Vec3 omega = test::random_vec3(rng, 5.0);
  for (int i = 0; i < 100000; ++i) {
    q = integrate_quat(q, omega, 1e-3);
  }
  CHECK(std::abs(q.norm() - 1.0) < 1e-9);
}

TEST_CASE("quat_mul associativity on random triples") {
  auto rng = test::make_rng(3);
  for (int i = 0; i < 200; ++i) {
    const Quat a = test::random_unit_quat(rng);
    const Quat b = test::random_unit_quat(rng);
    const Quat c = test::random_unit_quat(rng);
    const Quat lhs = quat_mul(quat_mul(a, b), c);
    const Quat rhs = quat_mul(a, quat_mul(b, c));
    CHECK(std::abs(lhs.w - rhs.w) < 1e-12);
    CHECK((lhs.vec() - rhs.vec()).norm() < 1e-12);
  }
}

TEST_CASE("quat_angle of self-error is zero for all unit q") {
  auto rng = test::make_rng(5);
  for (int i = 0; i < 200; ++i) {
    const Quat q = test::random_unit_quat(rng);
    CHECK(quat_angle(quat_error(q, q)) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("rotation matrix agrees with rotate") {
  auto rng = test::make_rng(9);
  for (int i = 0; i < 100; ++i) {
    const Quat q = test::random_unit_quat(rng);
    const Vec3 v = test::random_vec3(rng, 2.0);
    CHECK((q.rotation() * v - q.rotate(v)).norm() < 1e-12);
  }
}

TEST_CASE("compose_inertia single part is itself") {
  const Inertia part = Inertia::cuboid(2.5, {0.2, 0.1, 0.3}, {0.4, -0.2, 0.1});
  const Inertia out = compose_inertia({{part, {}}});
  CHECK(out.mass == doctest::Approx(part.mass));
  CHECK((out.com - part.com).norm() < 1e-14);
  CHECK((out.moment - part.moment).norm() < 1e-14);
}

TEST_CASE("compose_inertia two point masses") {
  const double m = 1.7, d = 0.35;
  const Inertia out = compose_inertia({
      {Inertia::point_mass(m, {d, 0, 0}), {}},
      {Inertia::point_mass(m, {-d, 0, 0}), {}},
  });
  CHECK(out.mass == doctest::Approx(2 * m));
  CHECK(out.com.norm() < 1e-14);
  CHECK(out.moment(1, 1) == doctest::Approx(2 * m * d * d));
  CHECK(out.moment(2, 2) == doctest::Approx(2 * m * d * d));
  CHECK(out.moment(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("compose_inertia rejects empty and zero mass") {
  CHECK_THROWS_AS(compose_inertia({}), std::invalid_argument);
  CHECK_THROWS_AS(compose_inertia({{Inertia{0.0, Vec3::Zero(), Mat3::Zero()}, {}}}),
                  std::invalid_argument);
}

TEST_CASE("compose_inertia matches Monte-Carlo point cloud for a 5-body stack") {
  auto rng = test::make_rng(21);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> len(0.05, 0.25);
  std::uniform_real_distribution<double> mass(0.2, 3.0);

  std::vector<std::pair<Inertia, PartPose>> parts;
  std::vector<Vec3> cloud_points;
  std::vector<double> cloud_masses;
  constexpr int kSamplesPerBody = 60000;

  for (int b = 0; b < 5; ++b) {
    const double m = mass(rng);
    const Vec3 at(u(rng), u(rng), u(rng));
    const Vec3 sides(len(rng), len(rng), len(rng));
    parts.push_back({Inertia::cuboid(m, sides, at), {}});
    std::uniform_real_distribution<double> px(-0.5 * sides.x(), 0.5 * sides.x());
    std::uniform_real_distribution<double> py(-0.5 * sides.y(), 0.5 * sides.y());
    std::uniform_real_distribution<double> pz(-0.5 * sides.z(), 0.5 * sides.z());
    for (int i = 0; i < kSamplesPerBody; ++i) {
      cloud_points.push_back(at + Vec3(px(rng), py(rng), pz(rng)));
      cloud_masses.push_back(m / kSamplesPerBody);
    }
  }

  const Inertia composite = compose_inertia(parts);

  double total = 0.0;
  Vec3 com = Vec3::Zero();
  for (size_t i = 0; i < cloud_points.size(); ++i) {
    total += cloud_masses[i];
    com += cloud_masses[i] * cloud_points[i];
  }
  com /= total;
  Mat3 moment = Mat3::Zero();
  for (size_t i = 0; i < cloud_points.size(); ++i) {
    const Vec3 d = cloud_points[i] - com;
    moment += cloud_masses[i] *
              (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }

  CHECK(total == doctest::Approx(composite.mass));
  CHECK((com - composite.com).norm() < 5e-4);
  CHECK((moment - composite.moment).norm() / composite.moment.norm() < 0.01);
}

TEST_CASE("compose_inertia result is symmetric PSD") {
  auto rng = test::make_rng(33);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> mass(0.1, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<Inertia, PartPose>> parts;
    const int n = 1 + static_cast<int>(trial % 6);
    for (int b = 0; b < n; ++b) {
      parts.push_back({Inertia::sphere(mass(rng), 0.05 + 0.1 * std::abs(u(rng)),
                                       {u(rng), u(rng), u(rng)}),
                       {}});
    }
    const Inertia out = compose_inertia(parts);
    CHECK((out.moment - out.moment.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> es(out.moment);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    // Triangle inequality on principal moments.
    const Vec3 ev = es.eigenvalues();
    CHECK(ev(0) + ev(1) >= ev(2) - 1e-12);
  }
}
