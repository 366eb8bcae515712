// Copyright 2026 The Reflex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REFLEX_NETCORE_LAYERS_HPP_
#define REFLEX_NETCORE_LAYERS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reflex/netcore/tensor.hpp"

namespace reflex::net {

template <typename T>
using MatMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap = Eigen::Map<
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// A named reference to a learnable tensor owned by a layer.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* tensor = nullptr;
};

/// Minimal layer interface. forward() caches whatever backward() needs, so a
/// layer instance handles one forward/backward pair at a time.
template <typename T>
class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor<T> forward(const Tensor<T>& x) = 0;
  /// Accumulates parameter gradients and returns the gradient wrt the input.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<ParamRef<T>> params() { return {}; }
};

namespace detail {

/// Rows of a tensor interpreted as [batch, features]. 1-D tensors are a
/// single row; higher-rank tensors flatten trailing dims into features.
template <typename T>
inline std::pair<int, int> as_matrix_dims(const Tensor<T>& x) {
  if (x.dims.empty()) throw std::invalid_argument("layer: empty tensor");
  if (x.dims.size() == 1) return {1, x.dims[0]};
  int rows = x.dims[0];
  int cols = 1;
  for (std::size_t i = 1; i < x.dims.size(); ++i) cols *= x.dims[i];
  return {rows, cols};
}

}  // namespace detail

/// Fully connected layer, weights [out, in] row-major.
template <typename T>
class Dense : public Module<T> {
 public:
  Dense(int in_features, int out_features, Rng& rng, std::string name)
      : in_(in_features), out_(out_features), name_(std::move(name)) {
    weight_ = Tensor<T>({out_features, in_features});
    bias_ = Tensor<T>({out_features});
    weight_.init_kaiming(rng, in_features);
    const double bb = 1.0 / std::sqrt(static_cast<double>(in_features));
    bias_.init_uniform(rng, bb);
    weight_.ensure_grad();
    bias_.ensure_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    auto [rows, cols] = detail::as_matrix_dims(x);
    if (cols != in_) throw std::invalid_argument("dense " + name_ + ": bad input width");
    input_ = x;
    rows_ = rows;
    Tensor<T> y(x.dims.size() == 1 ? std::vector<int>{out_}
                                   : std::vector<int>{rows, out_});
    ConstMatMap<T> xm(x.values.data(), rows, cols);
    ConstMatMap<T> wm(weight_.values.data(), out_, in_);
    MatMap<T> ym(y.values.data(), rows, out_);
    ym.noalias() = xm * wm.transpose();
    ConstMatMap<T> bm(bias_.values.data(), 1, out_);
    ym.rowwise() += bm.row(0);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    ConstMatMap<T> gm(grad_out.values.data(), rows_, out_);
    ConstMatMap<T> xm(input_.values.data(), rows_, in_);
    ConstMatMap<T> wm(weight_.values.data(), out_, in_);
    MatMap<T> dwm(weight_.grad.data(), out_, in_);
    dwm.noalias() += gm.transpose() * xm;
    MatMap<T> dbm(bias_.grad.data(), 1, out_);
    dbm.row(0) += gm.colwise().sum();
    Tensor<T> dx(input_.dims);
    MatMap<T> dxm(dx.values.data(), rows_, in_);
    dxm.noalias() = gm * wm;
    return dx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}};
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  int in_, out_, rows_ = 0;
  std::string name_;
  Tensor<T> weight_, bias_, input_;
};

template <typename T>
class ReLU : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    input_ = x;
    Tensor<T> y = x;
    for (auto& v : y.values) v = v > T(0) ? v : T(0);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> dx = grad_out;
    for (std::size_t i = 0; i < dx.values.size(); ++i)
      if (input_.values[i] <= T(0)) dx.values[i] = T(0);
    return dx;
  }

 private:
  Tensor<T> input_;
};

template <typename T>
class Sigmoid : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    output_ = x;
    for (auto& v : output_.values)
      v = T(1) / (T(1) + std::exp(-v));
    return output_;
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> dx = grad_out;
    for (std::size_t i = 0; i < dx.values.size(); ++i) {
      const T s = output_.values[i];
      dx.values[i] *= s * (T(1) - s);
    }
    return dx;
  }

 private:
  Tensor<T> output_;
};

template <typename T>
class Tanh : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    output_ = x;
    for (auto& v : output_.values) v = std::tanh(v);
    return output_;
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> dx = grad_out;
    for (std::size_t i = 0; i < dx.values.size(); ++i) {
      const T t = output_.values[i];
      dx.values[i] *= T(1) - t * t;
    }
    return dx;
  }

 private:
  Tensor<T> output_;
};

/// Reshapes [C, D, H, W] activations to a flat [C*D*H*W] vector.
template <typename T>
class Flatten : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    in_dims_ = x.dims;
    return x.reshaped({static_cast<int>(x.numel())});
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return grad_out.reshaped(in_dims_);
  }

 private:
  std::vector<int> in_dims_;
};

template <typename T>
class Sequential : public Module<T> {
 public:
  Sequential() = default;

  void add(std::unique_ptr<Module<T>> m) { layers_.push_back(std::move(m)); }

  Tensor<T> forward(const Tensor<T>& x) override {
    Tensor<T> h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      g = (*it)->backward(g);
    return g;
  }

  std::vector<ParamRef<T>> params() override {
    std::vector<ParamRef<T>> out;
    for (auto& l : layers_)
      for (auto& p : l->params()) out.push_back(p);
    return out;
  }

  std::size_t size() const { return layers_.size(); }
  Module<T>& layer(std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Module<T>>> layers_;
};

/// MLP with ReLU hidden activations and a linear output layer.
template <typename T>
inline std::unique_ptr<Sequential<T>> make_mlp(const std::vector<int>& widths,
                                               Rng& rng, const std::string& name) {
  if (widths.size() < 2) throw std::invalid_argument("make_mlp: need >= 2 widths");
  auto seq = std::make_unique<Sequential<T>>();
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    seq->add(std::make_unique<Dense<T>>(widths[i], widths[i + 1], rng,
                                        name + ".fc" + std::to_string(i)));
    if (i + 2 < widths.size()) seq->add(std::make_unique<ReLU<T>>());
  }
  return seq;
}

template <typename T>
inline void zero_grads(const std::vector<ParamRef<T>>& params) {
  for (auto& p : params) p.tensor->zero_grad();
}

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_LAYERS_HPP_
