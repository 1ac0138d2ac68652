#include "saltus/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "saltus/io.hpp"

namespace saltus {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Static-partition parallel loop; falls back to inline execution.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const auto run_chunk = [&](int w) {
    const int lo = static_cast<int>(static_cast<long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    for (int i = lo; i < hi; ++i) fn(i);
  };
  for (int w = 1; w < workers; ++w) pool.emplace_back(run_chunk, w);
  run_chunk(0);
  for (auto& t : pool) t.join();
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void PpoConfig::validate() const {
  if (num_envs < 1 || horizon < 1 || total_steps < 1) {
    throw std::invalid_argument("PpoConfig: bad rollout sizes");
  }
  if (gamma <= 0.0 || gamma > 1.0 || gae_lambda <= 0.0 || gae_lambda > 1.0) {
    throw std::invalid_argument("PpoConfig: gamma/lambda out of range");
  }
  if (clip <= 0.0 || lr <= 0.0 || epochs < 1 || minibatches < 1) {
    throw std::invalid_argument("PpoConfig: bad update parameters");
  }
  if ((static_cast<long>(num_envs) * horizon) % minibatches != 0) {
    throw std::invalid_argument("PpoConfig: batch not divisible into minibatches");
  }
}

Eigen::VectorXd gaussian_logprob(const Eigen::MatrixXd& mean,
                                 const Eigen::VectorXd& log_std,
                                 const Eigen::MatrixXd& actions) {
  const Eigen::VectorXd inv_std = (-log_std.array()).exp();
  const Eigen::MatrixXd z =
      inv_std.asDiagonal() * (actions - mean);
  const double log_det = log_std.sum();
  const int d = static_cast<int>(mean.rows());
  return (-0.5 * z.array().square().colwise().sum() - log_det -
          0.5 * d * kLog2Pi)
      .transpose();
}

void gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
         const std::vector<uint8_t>& dones, double gamma, double lambda,
         double next_value, bool next_done, Eigen::VectorXd& advantages,
         Eigen::VectorXd& returns) {
  const int t_max = static_cast<int>(rewards.size());
  if (values.size() != t_max || static_cast<int>(dones.size()) != t_max) {
    throw std::invalid_argument("gae: length mismatch");
  }
  advantages.resize(t_max);
  returns.resize(t_max);
  double last = 0.0;
  for (int t = t_max - 1; t >= 0; --t) {
    // A terminal at t cuts both the bootstrap and the trace.
    const double nonterminal = dones[t] ? 0.0 : 1.0;
    const double v_next = (t == t_max - 1) ? (next_done ? 0.0 : next_value)
                                           : values[t + 1];
    const double delta = rewards[t] + gamma * nonterminal * v_next - values[t];
    last = delta + gamma * lambda * nonterminal * last;
    advantages[t] = last;
  }
  returns = advantages + values;
}

LossStats ppo_loss(const PolicyNet& net, const Eigen::MatrixXd& obs,
                   const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& logp_old,
                   const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns, double clip,
                   double entropy_coef, double value_coef,
                   Eigen::VectorXd& grad) {
  const int batch = static_cast<int>(obs.cols());
  const int act_dim = net.act_dim();

  PolicyNet::Cache cache;
  const PolicyNet::Forward fwd = net.forward_cached(obs, cache);

  const Eigen::VectorXd log_std = net.log_std();
  const Eigen::VectorXd std = log_std.array().exp();
  const Eigen::VectorXd inv_std = (-log_std.array()).exp();
  const Eigen::MatrixXd z = inv_std.asDiagonal() * (actions - fwd.mean);

  const Eigen::VectorXd logp_new =
      (-0.5 * z.array().square().colwise().sum() - log_std.sum() -
       0.5 * act_dim * kLog2Pi)
          .transpose();
  const Eigen::ArrayXd logratio = (logp_new - logp_old).array();
  const Eigen::ArrayXd ratio = logratio.exp();

  // Clipped surrogate, CleanRL form: maximize min(r A, clip(r) A).
  const Eigen::ArrayXd adv = advantages.array();
  const Eigen::ArrayXd pg1 = -adv * ratio;
  const Eigen::ArrayXd pg2 =
      -adv * ratio.min(1.0 + clip).max(1.0 - clip);
  const Eigen::ArrayXd pg = pg1.max(pg2);

  LossStats stats;
  stats.policy = pg.mean();
  const Eigen::ArrayXd verr = fwd.value.array() - returns.array();
  stats.value = 0.5 * verr.square().mean();
  stats.entropy = log_std.sum() + 0.5 * act_dim * (kLog2Pi + 1.0);
  stats.approx_kl = ((ratio - 1.0) - logratio).mean();
  stats.total = stats.policy + value_coef * stats.value -
                entropy_coef * stats.entropy;

  // dL/dlogp per sample: surrogate gradient flows only where the unclipped
  // branch is active.
  Eigen::ArrayXd dlogp = Eigen::ArrayXd::Zero(batch);
  for (int b = 0; b < batch; ++b) {
    if (pg1(b) >= pg2(b)) {
      dlogp(b) = -adv(b) * ratio(b) / batch;
    }
  }

  // Heads: dlogp/dmean = z / std (per column), value loss gradient direct.
  Eigen::MatrixXd dmean = inv_std.asDiagonal() * z;
  dmean.array().rowwise() *= dlogp.transpose();
  const Eigen::VectorXd dvalue =
      (value_coef * verr / batch).matrix();

  net.backward(cache, dmean, dvalue, grad);

  // log-std block: policy term plus the entropy bonus.
  Eigen::Map<Eigen::VectorXd> g_logstd(grad.data() + net.log_std_offset(),
                                       act_dim);
  const Eigen::MatrixXd z2m1 = z.array().square() - 1.0;
  g_logstd.noalias() += z2m1 * dlogp.matrix();
  g_logstd.array() -= entropy_coef;
  return stats;
}

LossStats ppo_update(PolicyNet& net, AdamOptimizer& opt, RolloutBatch& batch,
                     const PpoConfig& cfg, std::mt19937_64& rng) {
  const int total = static_cast<int>(batch.obs.cols());
  const int mb_size = total / cfg.minibatches;

  // Whole-batch advantage normalization.
  const double mean = batch.advantages.mean();
  const double var =
      (batch.advantages.array() - mean).square().sum() / batch.advantages.size();
  batch.advantages = ((batch.advantages.array() - mean) /
                      (std::sqrt(var) + 1e-8))
                         .matrix();

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);

  Eigen::VectorXd grad(net.param_count());
  Eigen::MatrixXd mb_obs(net.obs_dim(), mb_size);
  Eigen::MatrixXd mb_act(net.act_dim(), mb_size);
  Eigen::VectorXd mb_logp(mb_size), mb_adv(mb_size), mb_ret(mb_size);

  LossStats last;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < total; start += mb_size) {
      for (int i = 0; i < mb_size; ++i) {
        const int src = order[start + i];
        mb_obs.col(i) = batch.obs.col(src);
        mb_act.col(i) = batch.actions.col(src);
        mb_logp(i) = batch.logprobs(src);
        mb_adv(i) = batch.advantages(src);
        mb_ret(i) = batch.returns(src);
      }
      grad.setZero();
      last = ppo_loss(net, mb_obs, mb_act, mb_logp, mb_adv, mb_ret, cfg.clip,
                      cfg.entropy_coef, cfg.value_coef, grad);
      if (!std::isfinite(last.total)) {
        throw std::runtime_error("ppo_update: non-finite loss, aborting");
      }
      const double norm = grad.norm();
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) {
        grad *= cfg.max_grad_norm / norm;
      }
      opt.step(net.params(), grad);
    }
  }
  return last;
}

void attitude_input_scaling(PolicyNet& net) {
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(Observation::kDim);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(Observation::kDim);
  const double mid = 0.5 * (kJointLimitLo + kJointLimitHi);
  const double half = 0.5 * (kJointLimitHi - kJointLimitLo);
  for (int i = 0; i < 3; ++i) scale(4 + i) = 1.0 / 5.0;
  for (int i = 0; i < kNumJoints; ++i) {
    offset(7 + i) = mid;
    scale(7 + i) = 1.0 / half;
    scale(7 + kNumJoints + i) = 1.0 / 10.0;
  }
  net.set_input_scaling(offset, scale);
}

TrainResult train(std::shared_ptr<const RobotModel> model,
                  const EnvConfig& env_cfg, const PpoConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log) {
  cfg.validate();
  const int threads = resolve_threads(cfg.threads);
  const int num_envs = cfg.num_envs;
  const int horizon = cfg.horizon;
  const int obs_dim = Observation::kDim;
  const int act_dim = kNumJoints;

  std::mt19937_64 master(cfg.seed);
  PolicyNet net(obs_dim, act_dim);
  net.init_weights(master);
  attitude_input_scaling(net);
  AdamOptimizer opt(net.param_count(), cfg.lr);

  std::vector<AttitudeEnv> envs;
  envs.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) {
    envs.emplace_back(model, env_cfg, mix_seed(cfg.seed, i + 1));
  }

  Eigen::MatrixXd obs(obs_dim, num_envs);
  for (int i = 0; i < num_envs; ++i) {
    const auto a = envs[i].reset().to_array();
    obs.col(i) = Eigen::Map<const Eigen::VectorXd>(a.data(), obs_dim);
  }

  const long batch_size = static_cast<long>(num_envs) * horizon;
  const long iterations = (cfg.total_steps + batch_size - 1) / batch_size;

  RolloutBatch batch;
  batch.obs.resize(obs_dim, batch_size);
  batch.actions.resize(act_dim, batch_size);
  batch.logprobs.resize(batch_size);
  batch.values.resize(batch_size);
  Eigen::VectorXd rewards(batch_size);
  std::vector<uint8_t> dones(batch_size);

  // Episode bookkeeping for the metrics log.
  std::vector<double> episode_reward(num_envs, 0.0);
  double window_reward_sum = 0.0;
  double window_angle_sum = 0.0;
  long window_episodes = 0;
  long window_collisions = 0;

  std::unique_ptr<CsvWriter> metrics;
  std::string checkpoint_path;
  if (!cfg.outdir.empty()) {
    ensure_directory(cfg.outdir);
    metrics = std::make_unique<CsvWriter>(cfg.outdir + "/metrics.csv");
    metrics->write_header({"iteration", "env_steps", "mean_episode_reward",
                           "mean_final_angle_deg", "collision_rate",
                           "policy_loss", "value_loss", "entropy", "approx_kl",
                           "wall_s"});
    checkpoint_path = cfg.outdir + "/checkpoint_latest.bin";
  }

  const double t_start = now_seconds();
  long env_steps = 0;
  TrainResult result;

  std::normal_distribution<double> normal(0.0, 1.0);
  for (long iter = 1; iter <= iterations; ++iter) {
    for (int t = 0; t < horizon; ++t) {
      const PolicyNet::Forward fwd = net.forward(obs);
      const Eigen::VectorXd std_vec = net.log_std().array().exp();
      Eigen::MatrixXd actions(act_dim, num_envs);
      for (int e = 0; e < num_envs; ++e) {
        for (int k = 0; k < act_dim; ++k) {
          actions(k, e) = fwd.mean(k, e) + std_vec(k) * normal(master);
        }
      }
      const Eigen::VectorXd logp = gaussian_logprob(fwd.mean, net.log_std(), actions);

      const long col0 = static_cast<long>(t) * num_envs;
      batch.obs.middleCols(col0, num_envs) = obs;
      batch.actions.middleCols(col0, num_envs) = actions;
      batch.logprobs.segment(col0, num_envs) = logp;
      batch.values.segment(col0, num_envs) = fwd.value;

      std::vector<AttitudeEnv::StepOut> outs(num_envs);
      parallel_for(num_envs, threads, [&](int e) {
        std::array<double, kNumJoints> a{};
        for (int k = 0; k < act_dim; ++k) a[k] = actions(k, e);
        outs[e] = envs[e].step(a);
        if (outs[e].done) {
          const double final_angle = outs[e].angle_err;
          outs[e].obs = envs[e].reset();
          outs[e].angle_err = final_angle;
        }
      });

      for (int e = 0; e < num_envs; ++e) {
        const auto& out = outs[e];
        rewards(col0 + e) = out.reward;
        dones[col0 + e] = out.done ? 1 : 0;
        episode_reward[e] += out.reward;
        if (out.done) {
          window_reward_sum += episode_reward[e];
          window_angle_sum += out.angle_err * 180.0 / M_PI;
          window_episodes += 1;
          window_collisions += out.collided ? 1 : 0;
          episode_reward[e] = 0.0;
        }
        const auto arr = out.obs.to_array();
        obs.col(e) = Eigen::Map<const Eigen::VectorXd>(arr.data(), obs_dim);
      }
      env_steps += num_envs;
    }

    // Bootstrap values for the rollout tail and compute GAE per env stream.
    const Eigen::VectorXd tail_values = net.forward(obs).value;
    batch.advantages.resize(batch_size);
    batch.returns.resize(batch_size);
    Eigen::VectorXd stream_r(horizon), stream_v(horizon), adv, ret;
    std::vector<uint8_t> stream_d(horizon);
    for (int e = 0; e < num_envs; ++e) {
      for (int t = 0; t < horizon; ++t) {
        const long idx = static_cast<long>(t) * num_envs + e;
        stream_r(t) = rewards(idx);
        stream_v(t) = batch.values(idx);
        stream_d[t] = dones[idx];
      }
      gae(stream_r, stream_v, stream_d, cfg.gamma, cfg.gae_lambda,
          tail_values(e), false, adv, ret);
      for (int t = 0; t < horizon; ++t) {
        const long idx = static_cast<long>(t) * num_envs + e;
        batch.advantages(idx) = adv(t);
        batch.returns(idx) = ret(t);
      }
    }

    LossStats loss;
    try {
      loss = ppo_update(net, opt, batch, cfg, master);
    } catch (const std::runtime_error&) {
      // Keep the last good checkpoint and stop.
      break;
    }

    if (iter % cfg.log_every == 0) {
      TrainLogRow row;
      row.iteration = iter;
      row.env_steps = env_steps;
      row.mean_episode_reward =
          window_episodes > 0 ? window_reward_sum / window_episodes : 0.0;
      row.mean_final_angle_deg =
          window_episodes > 0 ? window_angle_sum / window_episodes : 0.0;
      row.collision_rate = window_episodes > 0
                               ? static_cast<double>(window_collisions) /
                                     window_episodes
                               : 0.0;
      row.loss = loss;
      row.wall_s = now_seconds() - t_start;
      if (metrics) {
        metrics->write_row({std::to_string(row.iteration),
                            std::to_string(row.env_steps),
                            CsvWriter::format(row.mean_episode_reward),
                            CsvWriter::format(row.mean_final_angle_deg),
                            CsvWriter::format(row.collision_rate),
                            CsvWriter::format(loss.policy),
                            CsvWriter::format(loss.value),
                            CsvWriter::format(loss.entropy),
                            CsvWriter::format(loss.approx_kl),
                            CsvWriter::format(row.wall_s)});
        metrics->flush();
      }
      if (on_log) on_log(row);
      result.last_mean_reward = row.mean_episode_reward;
      window_reward_sum = window_angle_sum = 0.0;
      window_episodes = window_collisions = 0;
    }

    if (!checkpoint_path.empty() &&
        (iter % cfg.checkpoint_every == 0 || iter == iterations)) {
      net.save(checkpoint_path);
    }
  }

  if (!checkpoint_path.empty()) {
    net.save(checkpoint_path);
    const std::string final_path = cfg.outdir + "/checkpoint_final.bin";
    net.save(final_path);
    result.checkpoint_path = final_path;
  }
  result.env_steps = env_steps;
  result.iterations = iterations;
  return result;
}

EvalStats evaluate_policy(std::shared_ptr<const RobotModel> model,
                          const PolicyNet& net, const EnvConfig& eval_cfg,
                          int episodes, uint64_t seed, int threads) {
  EnvConfig cfg = eval_cfg;
  cfg.training = false;

  std::vector<double> final_angle(episodes, 0.0);
  std::vector<uint8_t> collided(episodes, 0);
  std::vector<double> ep_reward(episodes, 0.0);

  parallel_for(episodes, resolve_threads(threads), [&](int i) {
    AttitudeEnv env(model, cfg, mix_seed(seed, i));
    Observation obs = env.reset();
    Eigen::MatrixXd x(Observation::kDim, 1);
    while (!env.done()) {
      const auto arr = obs.to_array();
      x.col(0) = Eigen::Map<const Eigen::VectorXd>(arr.data(), arr.size());
      const PolicyNet::Forward fwd = net.forward(x);
      std::array<double, kNumJoints> a{};
      for (int k = 0; k < kNumJoints; ++k) a[k] = fwd.mean(k, 0);
      const auto out = env.step(a);
      obs = out.obs;
      ep_reward[i] += out.reward;
      if (out.done) {
        final_angle[i] = out.angle_err * 180.0 / M_PI;
        collided[i] = out.collided ? 1 : 0;
      }
    }
  });

  EvalStats stats;
  stats.episodes = episodes;
  std::vector<double> sorted = final_angle;
  std::sort(sorted.begin(), sorted.end());
  stats.median_final_angle_deg =
      episodes % 2 ? sorted[episodes / 2]
                   : 0.5 * (sorted[episodes / 2 - 1] + sorted[episodes / 2]);
  stats.collision_rate =
      std::accumulate(collided.begin(), collided.end(), 0.0) / episodes;
  stats.mean_reward =
      std::accumulate(ep_reward.begin(), ep_reward.end(), 0.0) / episodes;
  return stats;
}

}  // namespace saltus
