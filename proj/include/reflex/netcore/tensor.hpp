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

#ifndef REFLEX_NETCORE_TENSOR_HPP_
#define REFLEX_NETCORE_TENSOR_HPP_

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflex/core/rng.hpp"

namespace reflex::net {

/// Dense row-major tensor with an optional gradient buffer of the same shape.
template <typename T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> values;
  std::vector<T> grad;

  Tensor() = default;

  explicit Tensor(std::vector<int> dims_, T fill = T(0)) : dims(std::move(dims_)) {
    values.assign(numel_of(dims), fill);
  }

  static std::size_t numel_of(const std::vector<int>& d) {
    std::size_t n = 1;
    for (int v : d) {
      if (v <= 0) throw std::invalid_argument("tensor: dims must be positive");
      n *= static_cast<std::size_t>(v);
    }
    return n;
  }

  std::size_t numel() const { return values.size(); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }

  void zero_grad() {
    grad.assign(values.size(), T(0));
  }

  void fill(T v) { values.assign(values.size(), v); }

  /// Uniform init in [-bound, bound].
  void init_uniform(Rng& rng, double bound) {
    for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
  }

  /// Kaiming-style init for a layer with the given fan-in.
  void init_kaiming(Rng& rng, int fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    init_uniform(rng, bound);
  }

  Tensor<T> reshaped(std::vector<int> new_dims) const {
    if (numel_of(new_dims) != numel())
      throw std::invalid_argument("tensor: reshape element count mismatch");
    Tensor<T> out = *this;
    out.dims = std::move(new_dims);
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.dims = dims;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      out.values[i] = static_cast<U>(values[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_TENSOR_HPP_
