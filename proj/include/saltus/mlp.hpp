#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace saltus {

/// Actor-critic MLP: a shared ELU trunk feeding an action-mean head, a value
/// head and a state-independent log-std vector. All parameters live in one
/// flat vector so the optimizer, checkpoints and gradient checks can treat
/// the network uniformly.
///
/// Batches are column-major: one observation per column.
class PolicyNet {
 public:
  PolicyNet(int obs_dim, int act_dim, std::vector<int> widths = {512, 256, 128});

  /// Orthogonal-style initialization, small final gain on the actor mean,
  /// log-std at ln(0.5).
  void init_weights(std::mt19937_64& rng);

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const std::vector<int>& widths() const { return widths_; }
  int param_count() const { return static_cast<int>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  /// Fixed per-input affine conditioning (part of the saved model).
  void set_input_scaling(const Eigen::VectorXd& offset, const Eigen::VectorXd& scale);
  const Eigen::VectorXd& input_offset() const { return input_offset_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }

  struct Forward {
    Eigen::MatrixXd mean;   // act_dim x batch
    Eigen::VectorXd value;  // batch
  };

  /// Activations kept for the backward pass.
  struct Cache {
    Eigen::MatrixXd x_scaled;
    std::vector<Eigen::MatrixXd> h;  // post-ELU per trunk layer
  };

  Forward forward(const Eigen::MatrixXd& obs) const;
  Forward forward_cached(const Eigen::MatrixXd& obs, Cache& cache) const;

  /// Accumulate parameter gradients for upstream dL/dmean and dL/dvalue.
  /// grad must be zero-initialized to param_count().
  void backward(const Cache& cache, const Eigen::MatrixXd& dmean,
                const Eigen::VectorXd& dvalue, Eigen::VectorXd& grad) const;

  Eigen::VectorXd log_std() const;
  void set_log_std(const Eigen::VectorXd& v);
  /// Gradient offset of the log-std block inside the flat vector.
  int log_std_offset() const { return log_std_offset_; }

  void save(const std::string& path) const;
  static PolicyNet load(const std::string& path);

 private:
  struct Layer {
    int w_offset, b_offset, rows, cols;
  };

  Eigen::Map<const Eigen::MatrixXd> weight(const Layer& l) const;
  Eigen::Map<const Eigen::VectorXd> bias(const Layer& l) const;

  int obs_dim_ = 0;
  int act_dim_ = 0;
  std::vector<int> widths_;
  std::vector<Layer> trunk_;
  Layer mean_head_{};
  Layer value_head_{};
  int log_std_offset_ = 0;
  Eigen::VectorXd params_;
  Eigen::VectorXd input_offset_;
  Eigen::VectorXd input_scale_;
};

/// Adam with bias correction over a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(int size, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace saltus
