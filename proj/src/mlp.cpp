#include "saltus/mlp.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace saltus {

namespace {

constexpr uint32_t kMagic = 0x534c5031;  // "SLP1"

void elu_inplace(Eigen::MatrixXd& m) {
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      double& v = m(i, j);
      if (v < 0.0) v = std::exp(v) - 1.0;
    }
  }
}

// ELU'(z) recovered from the activation: 1 for z > 0, h + 1 otherwise.
double elu_grad_from_h(double h) { return h > 0.0 ? 1.0 : h + 1.0; }

// Orthogonal-ish matrix via QR of a Gaussian draw, scaled by `gain`.
Eigen::MatrixXd orthogonal(int rows, int cols, double gain,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(std::max(rows, cols), std::min(rows, cols));
  for (int j = 0; j < a.cols(); ++j) {
    for (int i = 0; i < a.rows(); ++i) a(i, j) = n(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Fix the sign convention for determinism.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols());
  for (int j = 0; j < a.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (rows >= cols) return gain * q;
  return gain * q.transpose();
}

}  // namespace

PolicyNet::PolicyNet(int obs_dim, int act_dim, std::vector<int> widths)
    : obs_dim_(obs_dim), act_dim_(act_dim), widths_(std::move(widths)) {
  if (obs_dim_ <= 0 || act_dim_ <= 0 || widths_.empty()) {
    throw std::invalid_argument("PolicyNet: bad dimensions");
  }
  int offset = 0;
  int in = obs_dim_;
  for (int w : widths_) {
    Layer l{offset, offset + w * in, w, in};
    offset += w * in + w;
    trunk_.push_back(l);
    in = w;
  }
  mean_head_ = {offset, offset + act_dim_ * in, act_dim_, in};
  offset += act_dim_ * in + act_dim_;
  value_head_ = {offset, offset + in, 1, in};
  offset += in + 1;
  log_std_offset_ = offset;
  offset += act_dim_;
  params_ = Eigen::VectorXd::Zero(offset);
  input_offset_ = Eigen::VectorXd::Zero(obs_dim_);
  input_scale_ = Eigen::VectorXd::Ones(obs_dim_);
}

Eigen::Map<const Eigen::MatrixXd> PolicyNet::weight(const Layer& l) const {
  return {params_.data() + l.w_offset, l.rows, l.cols};
}

Eigen::Map<const Eigen::VectorXd> PolicyNet::bias(const Layer& l) const {
  return {params_.data() + l.b_offset, l.rows};
}

void PolicyNet::init_weights(std::mt19937_64& rng) {
  const auto set_layer = [&](const Layer& l, double gain) {
    Eigen::Map<Eigen::MatrixXd> w(params_.data() + l.w_offset, l.rows, l.cols);
    w = orthogonal(l.rows, l.cols, gain, rng);
    Eigen::Map<Eigen::VectorXd> b(params_.data() + l.b_offset, l.rows);
    b.setZero();
  };
  for (const Layer& l : trunk_) set_layer(l, std::sqrt(2.0));
  set_layer(mean_head_, 0.01);
  set_layer(value_head_, 1.0);
  params_.segment(log_std_offset_, act_dim_).setConstant(std::log(0.5));
}

void PolicyNet::set_input_scaling(const Eigen::VectorXd& offset,
                                  const Eigen::VectorXd& scale) {
  if (offset.size() != obs_dim_ || scale.size() != obs_dim_) {
    throw std::invalid_argument("PolicyNet::set_input_scaling: bad size");
  }
  input_offset_ = offset;
  input_scale_ = scale;
}

PolicyNet::Forward PolicyNet::forward(const Eigen::MatrixXd& obs) const {
  Cache cache;
  return forward_cached(obs, cache);
}

PolicyNet::Forward PolicyNet::forward_cached(const Eigen::MatrixXd& obs,
                                             Cache& cache) const {
  if (obs.rows() != obs_dim_) {
    throw std::invalid_argument("PolicyNet::forward: observation width mismatch");
  }
  const int batch = static_cast<int>(obs.cols());
  cache.x_scaled =
      input_scale_.asDiagonal() * (obs.colwise() - input_offset_);
  cache.h.clear();
  cache.h.reserve(trunk_.size());

  const Eigen::MatrixXd* in = &cache.x_scaled;
  for (const Layer& l : trunk_) {
    Eigen::MatrixXd z = weight(l) * (*in);
    z.colwise() += bias(l);
    elu_inplace(z);
    cache.h.push_back(std::move(z));
    in = &cache.h.back();
  }

  Forward out;
  out.mean = weight(mean_head_) * (*in);
  out.mean.colwise() += bias(mean_head_);
  out.value = ((weight(value_head_) * (*in)).row(0) +
               Eigen::RowVectorXd::Constant(batch, bias(value_head_)(0)))
                  .transpose();
  return out;
}

void PolicyNet::backward(const Cache& cache, const Eigen::MatrixXd& dmean,
                         const Eigen::VectorXd& dvalue,
                         Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("PolicyNet::backward: grad size mismatch");
  }
  const int depth = static_cast<int>(trunk_.size());
  const Eigen::MatrixXd& top = cache.h.back();

  const auto accumulate_layer = [&](const Layer& l, const Eigen::MatrixXd& delta,
                                    const Eigen::MatrixXd& input) {
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + l.w_offset, l.rows, l.cols);
    gw.noalias() += delta * input.transpose();
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + l.b_offset, l.rows);
    gb.noalias() += delta.rowwise().sum();
  };

  // Heads.
  accumulate_layer(mean_head_, dmean, top);
  const Eigen::MatrixXd dvalue_row = dvalue.transpose();
  accumulate_layer(value_head_, dvalue_row, top);

  // Into the trunk.
  Eigen::MatrixXd delta = weight(mean_head_).transpose() * dmean;
  delta.noalias() += weight(value_head_).transpose() * dvalue_row;

  for (int layer = depth - 1; layer >= 0; --layer) {
    const Eigen::MatrixXd& h = cache.h[layer];
    for (int j = 0; j < delta.cols(); ++j) {
      for (int i = 0; i < delta.rows(); ++i) {
        delta(i, j) *= elu_grad_from_h(h(i, j));
      }
    }
    const Eigen::MatrixXd& input = layer == 0 ? cache.x_scaled : cache.h[layer - 1];
    accumulate_layer(trunk_[layer], delta, input);
    if (layer > 0) {
      delta = (weight(trunk_[layer]).transpose() * delta).eval();
    }
  }
}

Eigen::VectorXd PolicyNet::log_std() const {
  return params_.segment(log_std_offset_, act_dim_);
}

void PolicyNet::set_log_std(const Eigen::VectorXd& v) {
  if (v.size() != act_dim_) {
    throw std::invalid_argument("PolicyNet::set_log_std: bad size");
  }
  params_.segment(log_std_offset_, act_dim_) = v;
}

void PolicyNet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) {
    throw std::runtime_error("PolicyNet::save: cannot open " + path);
  }
  const auto put_u32 = [&](uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u32(kMagic);
  put_u32(1);  // version
  put_u32(static_cast<uint32_t>(obs_dim_));
  put_u32(static_cast<uint32_t>(act_dim_));
  put_u32(static_cast<uint32_t>(widths_.size()));
  for (int w : widths_) put_u32(static_cast<uint32_t>(w));
  const uint64_t count = static_cast<uint64_t>(params_.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  out.write(reinterpret_cast<const char*>(input_offset_.data()),
            static_cast<std::streamsize>(obs_dim_ * sizeof(double)));
  out.write(reinterpret_cast<const char*>(input_scale_.data()),
            static_cast<std::streamsize>(obs_dim_ * sizeof(double)));
  if (!out.good()) {
    throw std::runtime_error("PolicyNet::save: write failed for " + path);
  }
}

PolicyNet PolicyNet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) {
    throw std::runtime_error("PolicyNet::load: cannot open " + path);
  }
  const auto get_u32 = [&]() {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  if (get_u32() != kMagic) {
    throw std::runtime_error("PolicyNet::load: bad magic in " + path);
  }
  const uint32_t version = get_u32();
  if (version != 1) {
    throw std::runtime_error("PolicyNet::load: unsupported version");
  }
  const int obs_dim = static_cast<int>(get_u32());
  const int act_dim = static_cast<int>(get_u32());
  const uint32_t n_widths = get_u32();
  std::vector<int> widths(n_widths);
  for (auto& w : widths) w = static_cast<int>(get_u32());

  PolicyNet net(obs_dim, act_dim, widths);
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (count != static_cast<uint64_t>(net.param_count())) {
    throw std::runtime_error("PolicyNet::load: parameter count mismatch");
  }
  in.read(reinterpret_cast<char*>(net.params_.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  in.read(reinterpret_cast<char*>(net.input_offset_.data()),
          static_cast<std::streamsize>(obs_dim * sizeof(double)));
  in.read(reinterpret_cast<char*>(net.input_scale_.data()),
          static_cast<std::streamsize>(obs_dim * sizeof(double)));
  if (!in.good()) {
    throw std::runtime_error("PolicyNet::load: truncated file " + path);
  }
  return net;
}

AdamOptimizer::AdamOptimizer(int size, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bc1) /
                    ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace saltus
