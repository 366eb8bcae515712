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

#ifndef REFLEX_RL_ACTOR_CRITIC_HPP_
#define REFLEX_RL_ACTOR_CRITIC_HPP_

#include <array>
#include <memory>
#include <vector>

#include "reflex/netcore/checkpoint.hpp"
#include "reflex/netcore/conv.hpp"
#include "reflex/netcore/gaussian.hpp"
#include "reflex/netcore/layers.hpp"

namespace reflex::rl {

inline constexpr int kNumConstraints = 4;

struct ActorCriticConfig {
  int obs_dim = 0;      // full observation width
  int n_actions = 0;
  std::vector<int> hidden = {64, 64};
  double init_log_std = -3.9;  // approx log(0.02)

  // Optional shared conv trunk for raw-grid observations. When enabled the
  // first grid_channels*D*H*W entries of the observation are the grid and
  // the rest is proprio; the trunk output replaces the grid for all heads.
  bool conv_trunk = false;
  std::array<int, 3> grid_dims = {0, 0, 0};
  int grid_channels = 3;
  int trunk_latent = 64;
};

/// Diagonal-Gaussian policy plus one reward critic and one critic per
/// constraint. Heads are independent MLPs over the (possibly trunk-encoded)
/// observation. Double-precision copies of head outputs keep log-prob math
/// reproducible.
class ActorCritic {
 public:
  ActorCritic(const ActorCriticConfig& cfg, Rng& rng);

  ActorCritic(const ActorCritic&) = delete;
  ActorCritic& operator=(const ActorCritic&) = delete;

  const ActorCriticConfig& config() const { return cfg_; }

  /// Policy mean for one observation (caches the pass for backward_policy).
  std::vector<double> policy_mean(const std::vector<float>& obs);
  std::vector<double> log_std() const;

  double value(const std::vector<float>& obs);
  double cost_value(int constraint, const std::vector<float>& obs);

  /// Backpropagates d(loss)/d(mean) through the cached policy pass and
  /// accumulates d(loss)/d(log_std) onto the log-std parameter.
  void backward_policy(const std::vector<double>& grad_mean,
                       const std::vector<double>& grad_log_std);
  /// Backpropagates a scalar gradient through the cached critic pass.
  void backward_value(double grad);
  void backward_cost_value(int constraint, double grad);

  std::vector<net::ParamRef<float>> params();
  std::vector<net::CheckpointEntry> snapshot();
  void restore(const std::vector<net::CheckpointEntry>& entries);

 private:
  net::TensorF encode_features(const std::vector<float>& obs, bool cache_policy);
  net::TensorF features_for_value(const std::vector<float>& obs);

  ActorCriticConfig cfg_;
  int feat_dim_ = 0;   // head input width
  int grid_flat_ = 0;  // leading grid entries when the trunk is enabled

  // The trunk caches one forward pass at a time, so each head forward must
  // be followed by its backward before the next forward (the updater does).
  std::unique_ptr<net::Sequential<float>> trunk_;
  std::unique_ptr<net::Sequential<float>> policy_;
  std::unique_ptr<net::Sequential<float>> value_;
  std::array<std::unique_ptr<net::Sequential<float>>, kNumConstraints> cost_values_;
  net::TensorF log_std_;
};

}  // namespace reflex::rl

#endif  // REFLEX_RL_ACTOR_CRITIC_HPP_
