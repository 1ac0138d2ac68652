#include "saltus/designopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "saltus/io.hpp"
#include "saltus/primitives.hpp"

namespace saltus {

const std::array<const char*, kNumMetrics> kMetricNames = {
    "h_max", "h_y", "d_max", "pitch_err", "theta_roll", "theta_pitch",
    "theta_yaw"};

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 2) {
    throw std::invalid_argument("linspace: need at least 2 steps");
  }
  if (hi <= lo) {
    throw std::invalid_argument("linspace: empty range");
  }
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) {
    v[i] = lo + (hi - lo) * i / (steps - 1);
  }
  return v;
}

namespace {

std::vector<double> with_value(std::vector<double> v, double extra) {
  v.push_back(extra);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          v.end());
  return v;
}

void check_dim(const std::vector<double>& values, const ParamRange& range,
               const char* name) {
  if (values.empty()) {
    throw std::invalid_argument(std::string("GridSpec: empty range for ") + name);
  }
  for (double v : values) {
    if (!range.contains(v)) {
      std::ostringstream ss;
      ss << "GridSpec: " << name << " value " << v << " outside search space ["
         << range.lo << ", " << range.hi << "]";
      throw std::invalid_argument(ss.str());
    }
  }
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  // splitmix64 step over the combined value
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

GridSpec GridSpec::defaults() {
  GridSpec spec;
  const DesignParams base = DesignParams::baseline();
  spec.l_body = with_value(linspace(0.4, 1.0, 5), base.l_body);
  spec.w_body_f = with_value(linspace(0.2, 0.6, 5), base.w_body_f);
  spec.w_body_b = with_value(linspace(0.2, 0.6, 5), base.w_body_b);
  return spec;
}

void GridSpec::validate() const {
  const SearchSpace space;
  check_dim(m_l, space.m_l, "m_l");
  check_dim(l_body, space.l_body, "l_body");
  check_dim(w_body_f, space.w_body_f, "w_body_f");
  check_dim(w_body_b, space.w_body_b, "w_body_b");
  check_dim(l1, space.l1, "l1");
  check_dim(l3, space.l3, "l3");
  check_dim(spring_k, space.spring_k, "spring_k");
}

size_t GridSpec::size() const {
  return m_l.size() * l_body.size() * w_body_f.size() * w_body_b.size() *
         l1.size() * l3.size() * spring_k.size();
}

std::vector<DesignParams> enumerate_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<DesignParams> grid;
  grid.reserve(spec.size());
  for (double m_l : spec.m_l) {
    for (double l_body : spec.l_body) {
      for (double w_f : spec.w_body_f) {
        for (double w_b : spec.w_body_b) {
          for (double l1 : spec.l1) {
            for (double l3 : spec.l3) {
              for (double k : spec.spring_k) {
                DesignParams p = DesignParams::baseline();
                p.m_l = m_l;
                p.l_body = l_body;
                p.w_body_f = w_f;
                p.w_body_b = w_b;
                p.leg.l1 = l1;
                p.leg.l3 = l3;
                p.leg.spring_k = k;
                grid.push_back(p);
              }
            }
          }
        }
      }
    }
  }
  return grid;
}

std::vector<std::array<double, kNumMetrics>> normalize_metrics(
    const std::vector<RawMetrics>& raw) {
  std::array<double, kNumMetrics> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& r : raw) {
    if (r.failed) continue;
    const auto m = r.as_array();
    for (int k = 0; k < kNumMetrics; ++k) {
      lo[k] = std::min(lo[k], m[k]);
      hi[k] = std::max(hi[k], m[k]);
    }
  }

  std::vector<std::array<double, kNumMetrics>> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].failed) {
      out[i].fill(0.0);
      continue;
    }
    const auto m = raw[i].as_array();
    for (int k = 0; k < kNumMetrics; ++k) {
      const double span = hi[k] - lo[k];
      out[i][k] = span > 0.0 ? (m[k] - lo[k]) / span : 0.5;
    }
  }
  return out;
}

std::vector<double> score(const std::vector<RawMetrics>& raw,
                          const ScoreWeights& weights) {
  const auto normalized = normalize_metrics(raw);
  const auto w = weights.as_array();
  std::vector<double> scores(raw.size(), 0.0);
  for (size_t i = 0; i < raw.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < kNumMetrics; ++k) s += w[k] * normalized[i][k];
    scores[i] = s;
  }
  return scores;
}

RawMetrics evaluate_design(const DesignParams& params, const GridRunConfig& cfg,
                           uint64_t point_seed) {
  RawMetrics raw;
  try {
    const RobotModel model = RobotModel::build(params);

    JumpSequence vertical = vertical_jump_sequence();
    vertical.tau_cap = cfg.jump_tau_cap;
    vertical.physics_hz = cfg.physics_hz;
    const JumpMetrics vjump = run_vertical_jump(model, vertical, point_seed);
    raw.h_max = vjump.h_max;

    JumpSequence forward = forward_jump_sequence();
    forward.tau_cap = cfg.jump_tau_cap;
    forward.physics_hz = cfg.physics_hz;
    const JumpMetrics fjump = run_forward_jump(model, forward, point_seed);
    raw.h_y = fjump.h_y;
    raw.d_max = fjump.d_max;
    raw.pitch_err = fjump.pitch_err;

    FlightConfig fly;
    fly.physics_hz = cfg.physics_hz;
    fly.tau_cap = cfg.reorientation_tau_cap;
    fly.spring_enabled = false;
    for (Axis axis : {Axis::kRoll, Axis::kPitch, Axis::kYaw}) {
      const ReorientationResult r =
          run_reorientation(model, axis, cfg.reorientation_duration, fly);
      const double angle = r.collided ? 0.0 : std::abs(r.theta_achieved);
      switch (axis) {
        case Axis::kRoll: raw.theta_roll = angle; break;
        case Axis::kPitch: raw.theta_pitch = angle; break;
        case Axis::kYaw: raw.theta_yaw = angle; break;
      }
    }
  } catch (const std::exception&) {
    raw.failed = true;
  }
  if (!std::isfinite(raw.h_max) || !std::isfinite(raw.d_max) ||
      !std::isfinite(raw.pitch_err)) {
    raw.failed = true;
  }
  return raw;
}

namespace {

std::string journal_path(const std::string& outdir) {
  return outdir + "/journal.csv";
}

std::map<int, RawMetrics> load_journal(const std::string& outdir) {
  std::map<int, RawMetrics> done;
  std::ifstream in(journal_path(outdir));
  if (!in.good()) return done;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kNumMetrics + 2) continue;
    RawMetrics raw;
    const int index = std::stoi(cells[0]);
    raw.h_max = std::stod(cells[1]);
    raw.h_y = std::stod(cells[2]);
    raw.d_max = std::stod(cells[3]);
    raw.pitch_err = std::stod(cells[4]);
    raw.theta_roll = std::stod(cells[5]);
    raw.theta_pitch = std::stod(cells[6]);
    raw.theta_yaw = std::stod(cells[7]);
    raw.failed = cells[8] == "1";
    done[index] = raw;
  }
  return done;
}

}  // namespace

std::vector<GridResult> run_grid(const GridSpec& spec, const GridRunConfig& cfg,
                                 const ScoreWeights& weights) {
  const std::vector<DesignParams> grid = enumerate_grid(spec);
  if (grid.empty()) {
    throw std::invalid_argument("run_grid: empty grid");
  }

  std::map<int, RawMetrics> done;
  std::unique_ptr<std::ofstream> journal;
  std::mutex sink_mutex;
  if (!cfg.outdir.empty()) {
    ensure_directory(cfg.outdir);
    done = load_journal(cfg.outdir);
    const bool fresh = done.empty();
    journal = std::make_unique<std::ofstream>(journal_path(cfg.outdir),
                                              std::ios::app);
    if (fresh) {
      *journal << "index,h_max,h_y,d_max,pitch_err,theta_roll,theta_pitch,"
                  "theta_yaw,failed\n";
    }
  }

  std::vector<RawMetrics> raw(grid.size());
  std::vector<char> computed(grid.size(), 0);
  for (const auto& [index, metrics] : done) {
    if (index >= 0 && index < static_cast<int>(grid.size())) {
      raw[index] = metrics;
      computed[index] = 1;
    }
  }

  // Work pool over grid indices; results land in their slots and the journal
  // is the single serialized sink.
  std::atomic<size_t> next{0};
  const int threads = cfg.threads > 0
                          ? cfg.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  const auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= grid.size()) break;
      if (computed[i]) continue;
      const RawMetrics m = evaluate_design(grid[i], cfg, mix_seed(cfg.seed, i));
      raw[i] = m;
      if (journal) {
        // Full precision so a resumed run reproduces the outputs bit-exactly.
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i,
                      m.h_max, m.h_y, m.d_max, m.pitch_err, m.theta_roll,
                      m.theta_pitch, m.theta_yaw, m.failed ? 1 : 0);
        std::lock_guard<std::mutex> lock(sink_mutex);
        *journal << line;
        journal->flush();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads - 1; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const auto normalized = normalize_metrics(raw);
  const auto scores = score(raw, weights);

  std::vector<GridResult> results(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    results[i] = {static_cast<int>(i), grid[i], raw[i], normalized[i], scores[i]};
  }

  if (!cfg.outdir.empty()) {
    CsvWriter csv(cfg.outdir + "/grid_results.csv");
    std::vector<std::string> header = {"index",    "m_l", "l_body", "w_body_f",
                                       "w_body_b", "l1",  "l3",     "spring_k"};
    for (const char* name : kMetricNames) header.push_back(name);
    for (const char* name : kMetricNames) {
      header.push_back(std::string("norm_") + name);
    }
    header.push_back("score");
    header.push_back("failed");
    csv.write_header(header);
    for (const auto& r : results) {
      std::vector<std::string> row = {
          std::to_string(r.index),
          CsvWriter::format(r.params.m_l),
          CsvWriter::format(r.params.l_body),
          CsvWriter::format(r.params.w_body_f),
          CsvWriter::format(r.params.w_body_b),
          CsvWriter::format(r.params.leg.l1),
          CsvWriter::format(r.params.leg.l3),
          CsvWriter::format(r.params.leg.spring_k)};
      for (double v : r.raw.as_array()) row.push_back(CsvWriter::format(v));
      for (double v : r.normalized) row.push_back(CsvWriter::format(v));
      row.push_back(CsvWriter::format(r.score));
      row.push_back(r.raw.failed ? "1" : "0");
      csv.write_row(row);
    }

    // Long-format body-dimension pivots for the reorientation heat maps.
    const std::array<const char*, 3> axes = {"roll", "pitch", "yaw"};
    for (int a = 0; a < 3; ++a) {
      CsvWriter hm(cfg.outdir + "/heatmap_" + axes[a] + ".csv");
      hm.write_header({"l_body", "w_body_f", "w_body_b", "theta_deg"});
      for (const auto& r : results) {
        if (r.raw.failed) continue;
        const double angle =
            (a == 0   ? r.raw.theta_roll
             : a == 1 ? r.raw.theta_pitch
                      : r.raw.theta_yaw) * 180.0 / M_PI;
        hm.write_row({CsvWriter::format(r.params.l_body),
                      CsvWriter::format(r.params.w_body_f),
                      CsvWriter::format(r.params.w_body_b),
                      CsvWriter::format(angle)});
      }
    }
  }
  return results;
}

}  // namespace saltus
