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

#ifndef REFLEX_NETCORE_ADAM_HPP_
#define REFLEX_NETCORE_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "reflex/netcore/layers.hpp"

namespace reflex::net {

/// Adam with bias correction. State slots are bound to the parameter list
/// passed at construction, which must keep the same order across steps.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<ParamRef<T>> params, double lr = 3e-4,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
        eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].tensor->numel(), 0.0);
      v_[i].assign(params_[i].tensor->numel(), 0.0);
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long step_count() const { return t_; }

  /// Applies one update from the gradients accumulated in each tensor.
  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor<T>& p = *params_[i].tensor;
      if (p.grad.size() != p.values.size())
        throw std::logic_error("adam: parameter has no gradient buffer");
      for (std::size_t j = 0; j < p.values.size(); ++j) {
        const double g = static_cast<double>(p.grad[j]);
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.values[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor->zero_grad();
  }

  const std::vector<ParamRef<T>>& params() const { return params_; }

 private:
  std::vector<ParamRef<T>> params_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Global gradient-norm clipping over a parameter group. Returns the norm
/// before clipping.
template <typename T>
inline double clip_grad_norm(const std::vector<ParamRef<T>>& params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params)
    for (T g : p.tensor->grad) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto& p : params)
      for (T& g : p.tensor->grad) g *= scale;
  }
  return norm;
}

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_ADAM_HPP_
