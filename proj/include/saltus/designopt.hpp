#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "saltus/flight.hpp"
#include "saltus/jump.hpp"
#include "saltus/robot.hpp"

namespace saltus {

/// Weighted scoring of the normalized metric columns. Pitch error counts
/// against a design.
struct ScoreWeights {
  double h_max = 4.0;
  double h_y = 3.0;
  double d_max = 3.0;
  double pitch_err = -1.0;
  double theta_roll = 2.0;
  double theta_pitch = 2.0;
  double theta_yaw = 1.0;

  std::array<double, 7> as_array() const {
    return {h_max, h_y, d_max, pitch_err, theta_roll, theta_pitch, theta_yaw};
  }
};

constexpr int kNumMetrics = 7;
extern const std::array<const char*, kNumMetrics> kMetricNames;

/// Raw per-design simulation outputs (jump metrics and 5 s reorientation
/// angles). `failed` marks a point excluded from normalization.
struct RawMetrics {
  double h_max = 0.0;
  double h_y = 0.0;
  double d_max = 0.0;
  double pitch_err = 0.0;
  double theta_roll = 0.0;   // [rad], magnitudes
  double theta_pitch = 0.0;
  double theta_yaw = 0.0;
  bool failed = false;

  std::array<double, kNumMetrics> as_array() const {
    return {h_max, h_y, d_max, pitch_err, theta_roll, theta_pitch, theta_yaw};
  }
};

/// One value list per design field; single-valued lists hold the field
/// fixed. Enumeration is lexicographic in the declared field order with the
/// last field varying fastest.
struct GridSpec {
  std::vector<double> m_l{0.63};
  std::vector<double> l_body{0.6};
  std::vector<double> w_body_f{0.21};
  std::vector<double> w_body_b{0.3};
  std::vector<double> l1{0.175};
  std::vector<double> l3{0.3};
  std::vector<double> spring_k{800.0};

  /// Body-dimension sweep (5-step spans plus the built design's values),
  /// legs fixed; the built design is always one of the grid points.
  static GridSpec defaults();

  /// Throws std::invalid_argument on empty lists or values outside the
  /// search space.
  void validate() const;
  size_t size() const;
};

/// Evenly spaced values, steps >= 2.
std::vector<double> linspace(double lo, double hi, int steps);

/// Full Cartesian product in deterministic order; l1 == l2 and l3 == l4 are
/// tied by construction.
std::vector<DesignParams> enumerate_grid(const GridSpec& spec);

/// Min-max normalization per metric column over the non-failed rows;
/// constant columns map to 0.5. Failed rows get all-zero columns.
std::vector<std::array<double, kNumMetrics>> normalize_metrics(
    const std::vector<RawMetrics>& raw);

///

/// Weighted sum of normalized columns; failed rows score the weighted sum of
/// zeros (0).
std::vector<double> score(const std::vector<RawMetrics>& raw,
                          const ScoreWeights& weights);

struct GridResult {
  int index = 0;
  DesignParams params;
  RawMetrics raw;
  std::array<double, kNumMetrics> normalized{};
  double score = 0.0;
};

struct GridRunConfig {
  uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
  std::string outdir;  // empty: no files, results returned only
  double reorientation_duration = 5.0;
  double jump_tau_cap = 24.0;
  double reorientation_tau_cap = 8.0;
  double physics_hz = 800.0;
};

/// Vertical jump, forward jump and the three 5 s reorientation runs for one
/// design. Simulation failures return failed metrics instead of throwing.
RawMetrics evaluate_design(const DesignParams& params, const GridRunConfig& cfg,
                           uint64_t point_seed);

/// Parallel grid evaluation with per-point journaling (outdir/journal.csv)
/// for resume; emits grid_results.csv and heatmap_<axis>.csv when outdir is
/// set. Output rows are ordered by grid index regardless of scheduling.
std::vector<GridResult> run_grid(const GridSpec& spec, const GridRunConfig& cfg,
                                 const ScoreWeights& weights = {});

}  // namespace saltus
