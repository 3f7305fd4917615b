#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "shaperl/core.hpp"

namespace shaperl {

// Fully-connected net with tanh hidden activations and an identity output
// layer. All parameters live in one flat vector (per layer: weights row-major
// out x in, then biases), which keeps the optimizer and gradient checks
// simple.
class Mlp {
 public:
  Mlp() = default;

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  Mlp(std::vector<int> layer_sizes, RngStream& rng) : sizes_(std::move(layer_sizes)) {
    require(sizes_.size() >= 2, "Mlp: need at least input and output layer sizes");
    int total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_off_.push_back(total);
      total += sizes_[l + 1] * sizes_[l];
      b_off_.push_back(total);
      total += sizes_[l + 1];
    }
    params_.assign(total, 0.0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      double bound = std::sqrt(6.0 / double(sizes_[l] + sizes_[l + 1]));
      for (int i = 0; i < sizes_[l + 1] * sizes_[l]; ++i) {
        params_[w_off_[l] + i] = rng.uniform(-bound, bound);
      }
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int layers() const { return int(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int param_count() const { return int(params_.size()); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  double weight(int l, int out, int in) const {
    return params_[w_off_[l] + std::size_t(out) * sizes_[l] + in];
  }
  double bias(int l, int out) const { return params_[b_off_[l] + out]; }

  int weight_index(int l, int out, int in) const {
    return w_off_[l] + out * sizes_[l] + in;
  }
  int bias_index(int l, int out) const { return b_off_[l] + out; }

 private:
  std::vector<int> sizes_;
  std::vector<int> w_off_, b_off_;
  std::vector<double> params_;
};

// Activations retained by a forward pass: act[0] is the input, act[l] the
// output of layer l (post-tanh on hidden layers, linear on the last).
struct MlpCache {
  std::vector<std::vector<double>> act;
};

inline std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                       MlpCache& cache) {
  require(int(input.size()) == net.input_dim(), "mlp_forward: input size mismatch");
  cache.act.assign(net.layers() + 1, {});
  cache.act[0].assign(input.begin(), input.end());
  for (int l = 0; l < net.layers(); ++l) {
    const auto& in = cache.act[l];
    const int n_out = net.sizes()[l + 1];
    const int n_in = net.sizes()[l];
    std::vector<double> out(n_out);
    for (int i = 0; i < n_out; ++i) {
      double z = net.bias(l, i);
      for (int j = 0; j < n_in; ++j) z += net.weight(l, i, j) * in[j];
      out[i] = (l + 1 < net.layers()) ? std::tanh(z) : z;
    }
    cache.act[l + 1] = std::move(out);
  }
  return cache.act.back();
}

inline std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  MlpCache cache;
  return mlp_forward(net, input, cache);
}

// Reverse-mode gradients of upstream . output w.r.t. all parameters; writes a
// flat grad vector matching Mlp::params(). Optionally returns the input
// gradient.
inline void mlp_backward(const Mlp& net, const MlpCache& cache, std::span<const double> upstream,
                         std::vector<double>& param_grads,
                         std::vector<double>* input_grad = nullptr) {
  require(int(cache.act.size()) == net.layers() + 1, "mlp_backward: cache does not match network");
  for (int l = 0; l <= net.layers(); ++l) {
    require(int(cache.act[l].size()) == net.sizes()[l], "mlp_backward: cache does not match network");
  }
  require(int(upstream.size()) == net.output_dim(), "mlp_backward: upstream size mismatch");

  param_grads.assign(net.param_count(), 0.0);
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int l = net.layers() - 1; l >= 0; --l) {
    const auto& in = cache.act[l];
    const int n_out = net.sizes()[l + 1];
    const int n_in = net.sizes()[l];
    for (int i = 0; i < n_out; ++i) {
      param_grads[net.bias_index(l, i)] = delta[i];
      for (int j = 0; j < n_in; ++j) {
        param_grads[net.weight_index(l, i, j)] = delta[i] * in[j];
      }
    }
    if (l == 0 && input_grad == nullptr) break;
    std::vector<double> prev(n_in, 0.0);
    for (int j = 0; j < n_in; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n_out; ++i) acc += net.weight(l, i, j) * delta[i];
      // tanh'(z) = 1 - tanh(z)^2, read off the cached activation
      prev[j] = (l > 0) ? acc * (1.0 - in[j] * in[j]) : acc;
    }
    delta = std::move(prev);
  }
  if (input_grad) *input_grad = delta;
}

// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<double> m, v;
};

inline void adam_step(AdamState& st, std::vector<double>& params, std::span<const double> grads,
                      double lr) {
  require(params.size() == grads.size(), "adam_step: gradient shape mismatch");
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  require(st.m.size() == params.size(), "adam_step: state shape mismatch");
  st.t += 1;
  const double c1 = 1.0 - std::pow(st.beta1, double(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, double(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
    double m_hat = st.m[i] / c1;
    double v_hat = st.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + st.eps);
  }
}

}  // namespace shaperl
