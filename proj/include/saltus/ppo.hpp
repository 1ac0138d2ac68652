#pragma once

#include <functional>
#include <memory>

#include "saltus/mlp.hpp"
#include "saltus/rlenv.hpp"

namespace saltus {

/// Diagonal-Gaussian log density of each column of `actions`.
Eigen::VectorXd gaussian_logprob(const Eigen::MatrixXd& mean,
                                 const Eigen::VectorXd& log_std,
                                 const Eigen::MatrixXd& actions);

/// Generalized advantage estimation over one experience stream. `dones[t]`
/// marks a terminal at step t (no bootstrap across it); the value beyond the
/// last step enters through `next_value`/`next_done`.
void gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
         const std::vector<uint8_t>& dones, double gamma, double lambda,
         double next_value, bool next_done, Eigen::VectorXd& advantages,
         Eigen::VectorXd& returns);

/// Flattened on-policy batch (columns indexed t * num_envs + env).
struct RolloutBatch {
  Eigen::MatrixXd obs;      // obs_dim x M
  Eigen::MatrixXd actions;  // act_dim x M
  Eigen::VectorXd logprobs;
  Eigen::VectorXd values;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct LossStats {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
};

struct PpoConfig {
  int num_envs = 256;
  int horizon = 64;
  long total_steps = 5'000'000;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double lr = 3e-4;
  int epochs = 4;
  int minibatches = 4;
  double entropy_coef = 0.005;
  double value_coef = 0.5;
  double max_grad_norm = 1.0;
  uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
  std::string outdir;
  int checkpoint_every = 50;  // iterations
  int log_every = 1;

  void validate() const;
};

/// Clipped-surrogate PPO loss with value and entropy terms; fills the
/// analytic parameter gradient (zeroed first) and returns the statistics.
LossStats ppo_loss(const PolicyNet& net, const Eigen::MatrixXd& obs,
                   const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& logp_old,
                   const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns, double clip,
                   double entropy_coef, double value_coef,
                   Eigen::VectorXd& grad);

/// One PPO update over the batch: whole-batch advantage normalization, then
/// shuffled minibatch epochs with gradient clipping. Throws std::runtime_error
/// on a non-finite loss (the caller keeps its last good checkpoint).
LossStats ppo_update(PolicyNet& net, AdamOptimizer& opt, RolloutBatch& batch,
                     const PpoConfig& cfg, std::mt19937_64& rng);

/// Per-iteration training metrics row.
struct TrainLogRow {
  long iteration = 0;
  long env_steps = 0;
  double mean_episode_reward = 0.0;
  double mean_final_angle_deg = 0.0;
  double collision_rate = 0.0;
  LossStats loss;
  double wall_s = 0.0;
};

struct TrainResult {
  std::string checkpoint_path;
  long env_steps = 0;
  long iterations = 0;
  double last_mean_reward = 0.0;
};

/// Input conditioning used for attitude observations (fixed, stored in the
/// checkpoint).
void attitude_input_scaling(PolicyNet& net);

/// Rollout/update training loop against vectorized attitude environments.
/// Writes metrics.csv and periodic checkpoints under cfg.outdir when set.
TrainResult train(std::shared_ptr<const RobotModel> model,
                  const EnvConfig& env_cfg, const PpoConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log = nullptr);

struct EvalStats {
  double median_final_angle_deg = 0.0;
  double collision_rate = 0.0;
  double mean_reward = 0.0;
  int episodes = 0;
};

/// Deterministic-policy evaluation over full episodes with per-episode
/// seeding; noise off, nominal gains.
EvalStats evaluate_policy(std::shared_ptr<const RobotModel> model,
                          const PolicyNet& net, const EnvConfig& eval_cfg,
                          int episodes, uint64_t seed, int threads = 0);

}  // namespace saltus
