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

#ifndef REFLEX_NETCORE_GAUSSIAN_HPP_
#define REFLEX_NETCORE_GAUSSIAN_HPP_

#include <cmath>
#include <vector>

#include "reflex/core/rng.hpp"

namespace reflex::net {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Diagonal Gaussian over actions: mean from the network, state-independent
/// log standard deviations. All math in double for reproducible log-probs.
struct DiagGaussian {
  static std::vector<double> sample(const std::vector<double>& mean,
                                    const std::vector<double>& log_std, Rng& rng) {
    std::vector<double> a(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
      a[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
    return a;
  }

  static double log_prob(const std::vector<double>& action,
                         const std::vector<double>& mean,
                         const std::vector<double>& log_std) {
    double lp = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double inv_std = std::exp(-log_std[i]);
      const double z = (action[i] - mean[i]) * inv_std;
      lp += -0.5 * z * z - log_std[i] - kLogSqrt2Pi;
    }
    return lp;
  }

  static double entropy(const std::vector<double>& log_std) {
    double h = 0.0;
    for (double ls : log_std) h += ls + 0.5 + kLogSqrt2Pi;
    return h;
  }

  /// Accumulates coeff * d(log_prob)/d(mean) and coeff * d(log_prob)/d(log_std).
  static void log_prob_grad(const std::vector<double>& action,
                            const std::vector<double>& mean,
                            const std::vector<double>& log_std, double coeff,
                            std::vector<double>& grad_mean,
                            std::vector<double>& grad_log_std) {
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double var = std::exp(2.0 * log_std[i]);
      const double diff = action[i] - mean[i];
      grad_mean[i] += coeff * diff / var;
      grad_log_std[i] += coeff * (diff * diff / var - 1.0);
    }
  }
};

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_GAUSSIAN_HPP_
