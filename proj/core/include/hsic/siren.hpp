#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hsic/errors.hpp"

namespace hsic {

struct SirenConfig {
  int hidden_layers = 3;  // hidden layer count d
  int hidden_width = 64;  // units per hidden layer w
  int in_dim = 2;         // (x, y)
  int out_dim = 1;        // spectral bands C
  float omega0 = 30.0f;   // sine frequency scale

  void validate() const {
    if (in_dim != 2) throw ValidationError("SirenConfig: in_dim must be 2");
    if (out_dim < 1) throw ValidationError("SirenConfig: out_dim must be >= 1");
    if (hidden_layers < 1) throw ValidationError("SirenConfig: hidden_layers must be >= 1");
    if (hidden_width < 1) throw ValidationError("SirenConfig: hidden_width must be >= 1");
    if (!(omega0 > 0.0f)) throw ValidationError("SirenConfig: omega0 must be > 0");
  }
};

inline std::int64_t param_count(const SirenConfig& c) {
  const std::int64_t in = c.in_dim, w = c.hidden_width, out = c.out_dim, d = c.hidden_layers;
  return (in * w + w) + (d - 1) * (w * w + w) + (w * out + out);
}

template <typename T>
struct DenseLayer {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> weight;  // out x in
  Eigen::Matrix<T, Eigen::Dynamic, 1> bias;                 // out
};

// Sinusoidal MLP: every layer but the last applies sin(omega0 * (W h + b)).
template <typename T>
struct SirenNet {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  SirenConfig config;
  std::vector<DenseLayer<T>> layers;  // config.hidden_layers + 1 linear layers
};

using SirenModel = SirenNet<float>;
using SirenModelF64 = SirenNet<double>;

// Gradients and Adam moments share the layer layout.
template <typename T>
using ParamBlocks = std::vector<DenseLayer<T>>;

template <typename T>
ParamBlocks<T> zeros_like(const SirenNet<T>& net) {
  ParamBlocks<T> out;
  out.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    DenseLayer<T> z;
    z.weight.setZero(layer.weight.rows(), layer.weight.cols());
    z.bias.setZero(layer.bias.size());
    out.push_back(std::move(z));
  }
  return out;
}

// First layer uniform on [-1/in_dim, 1/in_dim]; deeper layers uniform on
// [-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0]. Biases use the same
// interval as their layer's weights. Deterministic per seed: draws happen
// in layer order, weights row-major, then the bias.
template <typename T>
SirenNet<T> init_siren(const SirenConfig& config, std::uint64_t seed) {
  config.validate();
  SirenNet<T> net;
  net.config = config;

  std::mt19937_64 rng(seed);
  const int n_linear = config.hidden_layers + 1;
  for (int k = 0; k < n_linear; ++k) {
    const int fan_in = (k == 0) ? config.in_dim : config.hidden_width;
    const int fan_out = (k == n_linear - 1) ? config.out_dim : config.hidden_width;
    const double bound = (k == 0)
                             ? 1.0 / config.in_dim
                             : std::sqrt(6.0 / fan_in) / config.omega0;
    std::uniform_real_distribution<double> dist(-bound, bound);

    DenseLayer<T> layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = static_cast<T>(dist(rng));
    for (int r = 0; r < fan_out; ++r) layer.bias(r) = static_cast<T>(dist(rng));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// Batched forward: coords is batch x in_dim, result is batch x out_dim.
template <typename T>
typename SirenNet<T>::Matrix forward(const SirenNet<T>& net,
                                     const typename SirenNet<T>::Matrix& coords) {
  using Matrix = typename SirenNet<T>::Matrix;
  const T w0 = static_cast<T>(net.config.omega0);
  Matrix h = coords;
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    Matrix z = (h * net.layers[k].weight.transpose()).rowwise() +
               net.layers[k].bias.transpose();
    if (k < last) {
      h = (z.array() * w0).sin().matrix();
    } else {
      h = std::move(z);
    }
  }
  return h;
}

// Single-coordinate forward with fixed per-sample accumulation order; the
// result does not depend on how a batch was chunked. Decode paths use this.
template <typename T>
typename SirenNet<T>::Vector forward_one(const SirenNet<T>& net, T x, T y) {
  using Vector = typename SirenNet<T>::Vector;
  const T w0 = static_cast<T>(net.config.omega0);
  Vector h(2);
  h << x, y;
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    Vector z = net.layers[k].weight * h + net.layers[k].bias;
    if (k < last) {
      h = (z.array() * w0).sin().matrix();
    } else {
      h = std::move(z);
    }
  }
  return h;
}

// MSE over all batch x out_dim residuals plus exact reverse-mode gradients.
// Sine layers backpropagate omega0 * cos(omega0 * z).
template <typename T>
T loss_and_grad(const SirenNet<T>& net,
                const typename SirenNet<T>::Matrix& coords,
                const typename SirenNet<T>::Matrix& targets,
                ParamBlocks<T>& grads) {
  using Matrix = typename SirenNet<T>::Matrix;
  if (coords.rows() != targets.rows())
    throw ValidationError("loss_and_grad: batch size mismatch between coords and targets");
  if (targets.cols() != net.config.out_dim)
    throw ValidationError("loss_and_grad: target width does not match out_dim");

  const T w0 = static_cast<T>(net.config.omega0);
  const std::size_t n_layers = net.layers.size();
  const std::size_t last = n_layers - 1;

  std::vector<Matrix> acts(n_layers + 1);  // acts[k] is the input to layer k
  std::vector<Matrix> pre(n_layers);       // pre-activations z_k
  acts[0] = coords;
  for (std::size_t k = 0; k < n_layers; ++k) {
    pre[k] = (acts[k] * net.layers[k].weight.transpose()).rowwise() +
             net.layers[k].bias.transpose();
    acts[k + 1] = (k < last) ? Matrix((pre[k].array() * w0).sin().matrix()) : pre[k];
  }

  const Matrix residual = acts[n_layers] - targets;
  const T denom = static_cast<T>(residual.rows()) * static_cast<T>(residual.cols());
  const T mse = residual.squaredNorm() / denom;

  if (grads.size() != n_layers) grads = zeros_like(net);
  Matrix delta = residual * (static_cast<T>(2) / denom);  // d mse / d output
  for (std::size_t k = n_layers; k-- > 0;) {
    grads[k].weight.noalias() = delta.transpose() * acts[k];
    grads[k].bias = delta.colwise().sum().transpose();
    if (k > 0) {
      Matrix upstream = delta * net.layers[k].weight;
      delta = (upstream.array() * (pre[k - 1].array() * w0).cos() * w0).matrix();
    }
  }
  return mse;
}

template <typename T>
struct AdamState {
  std::int64_t step = 0;
  T lr = static_cast<T>(2e-4);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);
  ParamBlocks<T> m, v;
};

template <typename T>
AdamState<T> make_adam(const SirenNet<T>& net, T lr) {
  AdamState<T> s;
  s.lr = lr;
  s.m = zeros_like(net);
  s.v = zeros_like(net);
  return s;
}

// Standard Adam with bias correction, applied in place.
template <typename T>
void adam_step(SirenNet<T>& net, const ParamBlocks<T>& grads, AdamState<T>& state) {
  if (grads.size() != net.layers.size() || state.m.size() != net.layers.size())
    throw ValidationError("adam_step: gradient/moment shape mismatch");

  state.step += 1;
  const T t = static_cast<T>(state.step);
  const T corr1 = static_cast<T>(1) - std::pow(state.beta1, t);
  const T corr2 = static_cast<T>(1) - std::pow(state.beta2, t);

  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw ValidationError("adam_step: gradient shape mismatch");
      m = state.beta1 * m + (static_cast<T>(1) - state.beta1) * grad;
      v = (state.beta2 * v.array() + (static_cast<T>(1) - state.beta2) * grad.array().square()).matrix();
      param.array() -=
          state.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + state.eps);
    };
    update(net.layers[k].weight, grads[k].weight, state.m[k].weight, state.v[k].weight);
    update(net.layers[k].bias, grads[k].bias, state.m[k].bias, state.v[k].bias);
  }
}

}  // namespace hsic
