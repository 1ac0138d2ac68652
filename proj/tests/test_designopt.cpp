#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "saltus/designopt.hpp"
#include "saltus/io.hpp"
#include "test_util.hpp"

using namespace saltus;

TEST_CASE("grid enumeration counts and ordering") {
  GridSpec spec;
  spec.l_body = {0.4, 0.6, 0.8};
  spec.w_body_f = {0.2, 0.4, 0.6};
  spec.w_body_b = {0.2, 0.4, 0.6};
  const auto grid = enumerate_grid(spec);
  CHECK(grid.size() == 27);
  // Last dimension varies fastest; w_body_b cycles first.
  CHECK(grid[0].w_body_b == 0.2);
  CHECK(grid[1].w_body_b == 0.4);
  CHECK(grid[3].w_body_f == 0.4);
  // Tied link lengths by construction.
  for (const auto& p : grid) {
    CHECK(p.leg.l1 == grid[0].leg.l1);
  }
}

TEST_CASE("default grid contains the built design") {
  const auto grid = enumerate_grid(GridSpec::defaults());
  const DesignParams base = DesignParams::baseline();
  bool found = false;
  for (const auto& p : grid) {
    if (std::abs(p.l_body - base.l_body) < 1e-12 &&
        std::abs(p.w_body_f - base.w_body_f) < 1e-12 &&
        std::abs(p.w_body_b - base.w_body_b) < 1e-12 &&
        std::abs(p.leg.l1 - base.leg.l1) < 1e-12 &&
        std::abs(p.leg.l3 - base.leg.l3) < 1e-12) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("grid spec validation") {
  GridSpec spec;
  spec.l_body = {};
  CHECK_THROWS_AS(enumerate_grid(spec), std::invalid_argument);
  spec.l_body = {1.4};  // beyond the search space
  CHECK_THROWS_AS(enumerate_grid(spec), std::invalid_argument);
  CHECK_THROWS_AS(linspace(0.2, 0.6, 1), std::invalid_argument);
}

namespace {
RawMetrics make_raw(double h, double hy, double d, double pe, double r,
                    double p, double y) {
  RawMetrics m;
  m.h_max = h;
  m.h_y = hy;
  m.d_max = d;
  m.pitch_err = pe;
  m.theta_roll = r;
  m.theta_pitch = p;
  m.theta_yaw = y;
  return m;
}
}  // namespace

TEST_CASE("min-max scoring endpoints") {
  std::vector<RawMetrics> raw = {make_raw(1, 0, 0, 0, 0, 0, 0),
                                 make_raw(2, 0, 0, 0, 0, 0, 0)};
  ScoreWeights w;
  const auto scores = score(raw, w);
  // Single varying metric: better point scores its weight, worse scores 0;
  // the six constant columns each contribute w * 0.5.
  double constant_part = 0.5 * (w.h_y + w.d_max + w.pitch_err + w.theta_roll +
                                w.theta_pitch + w.theta_yaw);
  CHECK(scores[1] == doctest::Approx(w.h_max + constant_part));
  CHECK(scores[0] == doctest::Approx(constant_part));
}

TEST_CASE("scores are invariant to positive affine transforms of a column") {
  auto rng = test::make_rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<RawMetrics> raw;
  for (int i = 0; i < 10; ++i) {
    raw.push_back(make_raw(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)));
  }
  const auto base = score(raw, {});

  std::vector<RawMetrics> scaled = raw;
  for (auto& r : scaled) r.d_max = 3.7 * r.d_max + 11.0;
  const auto transformed = score(scaled, {});
  for (size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i] == doctest::Approx(transformed[i]).epsilon(1e-12));
  }
}

TEST_CASE("score is linear in the weights") {
  auto rng = test::make_rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<RawMetrics> raw;
  for (int i = 0; i < 6; ++i) {
    raw.push_back(make_raw(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)));
  }
  ScoreWeights w1;
  ScoreWeights w2;
  w2.h_max = 1.0;
  w2.d_max = -2.0;
  w2.theta_yaw = 0.5;
  ScoreWeights sum;
  sum.h_max = w1.h_max + w2.h_max;
  sum.h_y = w1.h_y + w2.h_y;
  sum.d_max = w1.d_max + w2.d_max;
  sum.pitch_err = w1.pitch_err + w2.pitch_err;
  sum.theta_roll = w1.theta_roll + w2.theta_roll;
  sum.theta_pitch = w1.theta_pitch + w2.theta_pitch;
  sum.theta_yaw = w1.theta_yaw + w2.theta_yaw;

  const auto a = score(raw, w1);
  const auto b = score(raw, w2);
  const auto s = score(raw, sum);
  for (size_t i = 0; i < raw.size(); ++i) {
    CHECK(s[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-12));
  }
}

TEST_CASE("zero weights give zero scores") {
  std::vector<RawMetrics> raw = {make_raw(1, 2, 3, 4, 5, 6, 7),
                                 make_raw(2, 3, 4, 5, 6, 7, 8)};
  ScoreWeights w{0, 0, 0, 0, 0, 0, 0};
  for (double s : score(raw, w)) CHECK(s == 0.0);
}

TEST_CASE("failed points are excluded from normalization") {
  std::vector<RawMetrics> raw = {make_raw(1, 0, 0, 0, 0, 0, 0),
                                 make_raw(2, 0, 0, 0, 0, 0, 0),
                                 make_raw(100, 0, 0, 0, 0, 0, 0)};
  raw[2].failed = true;
  const auto norm = normalize_metrics(raw);
  CHECK(norm[1][0] == doctest::Approx(1.0));  // max among non-failed
  CHECK(norm[2][0] == 0.0);
}

TEST_CASE("single-point grid evaluates to finite metrics") {
  GridRunConfig cfg;
  cfg.threads = 1;
  const auto results = run_grid(GridSpec{}, cfg);
  REQUIRE(results.size() == 1);
  const auto m = results[0].raw.as_array();
  for (double v : m) CHECK(std::isfinite(v));
  CHECK_FALSE(results[0].raw.failed);
  CHECK(results[0].raw.h_max > 0.0);
  CHECK(results[0].raw.theta_roll > 0.0);
}

TEST_CASE("grid runs reproduce byte-identical CSVs and resume from journal") {
  GridSpec spec;
  spec.w_body_f = {0.2, 0.4};
  spec.w_body_b = {0.2, 0.4};

  const std::string dir_a = "/tmp/saltus_grid_a";
  const std::string dir_b = "/tmp/saltus_grid_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);

  GridRunConfig cfg;
  cfg.threads = 2;
  cfg.seed = 7;
  cfg.outdir = dir_a;
  run_grid(spec, cfg);
  cfg.outdir = dir_b;
  run_grid(spec, cfg);

  CHECK(read_file(dir_a + "/grid_results.csv") ==
        read_file(dir_b + "/grid_results.csv"));
  CHECK(read_file(dir_a + "/heatmap_roll.csv") ==
        read_file(dir_b + "/heatmap_roll.csv"));

  // Resume: a journal with every point marked complete short-circuits the
  // simulation; the rewritten CSV must be identical.
  cfg.outdir = dir_a;
  const auto resumed = run_grid(spec, cfg);
  CHECK(resumed.size() == 4);
  CHECK(read_file(dir_a + "/grid_results.csv") ==
        read_file(dir_b + "/grid_results.csv"));
}
