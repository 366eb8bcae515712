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

#include "reflex/rl/actor_critic.hpp"

#include <algorithm>
#include <stdexcept>

namespace reflex::rl {

ActorCritic::ActorCritic(const ActorCriticConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.obs_dim <= 0 || cfg.n_actions <= 0)
    throw std::invalid_argument("actor critic: obs_dim and n_actions must be positive");

  int head_in = cfg.obs_dim;
  if (cfg.conv_trunk) {
    grid_flat_ = cfg.grid_channels * cfg.grid_dims[0] * cfg.grid_dims[1] *
                 cfg.grid_dims[2];
    if (grid_flat_ <= 0 || grid_flat_ >= cfg.obs_dim)
      throw std::invalid_argument("actor critic: bad grid dims for conv trunk");
    trunk_ = std::make_unique<net::Sequential<float>>();
    trunk_->add(std::make_unique<net::Conv3d<float>>(cfg.grid_channels, 8, 3, 2, 1,
                                                     rng, "trunk.conv0"));
    trunk_->add(std::make_unique<net::ReLU<float>>());
    trunk_->add(std::make_unique<net::Conv3d<float>>(8, 16, 3, 2, 1, rng,
                                                     "trunk.conv1"));
    trunk_->add(std::make_unique<net::ReLU<float>>());
    trunk_->add(std::make_unique<net::Flatten<float>>());
    auto out2 = [&] {
      std::array<int, 3> d = cfg.grid_dims;
      for (int pass = 0; pass < 2; ++pass)
        for (int a = 0; a < 3; ++a) d[a] = (d[a] + 2 - 3) / 2 + 1;
      return 16 * d[0] * d[1] * d[2];
    }();
    trunk_->add(std::make_unique<net::Dense<float>>(out2, cfg.trunk_latent, rng,
                                                    "trunk.fc"));
    trunk_->add(std::make_unique<net::ReLU<float>>());
    head_in = cfg.trunk_latent + (cfg.obs_dim - grid_flat_);
  }
  feat_dim_ = head_in;

  std::vector<int> pw{head_in};
  pw.insert(pw.end(), cfg.hidden.begin(), cfg.hidden.end());
  pw.push_back(cfg.n_actions);
  policy_ = net::make_mlp<float>(pw, rng, "pi");

  std::vector<int> vw{head_in};
  vw.insert(vw.end(), cfg.hidden.begin(), cfg.hidden.end());
  vw.push_back(1);
  value_ = net::make_mlp<float>(vw, rng, "vr");
  for (int i = 0; i < kNumConstraints; ++i)
    cost_values_[i] = net::make_mlp<float>(vw, rng, "vc" + std::to_string(i));

  log_std_ = net::TensorF({cfg.n_actions});
  log_std_.fill(static_cast<float>(cfg.init_log_std));
  log_std_.ensure_grad();
}

net::TensorF ActorCritic::encode_features(const std::vector<float>& obs,
                                          bool /*cache_policy*/) {
  if (static_cast<int>(obs.size()) != cfg_.obs_dim)
    throw std::invalid_argument("actor critic: observation size mismatch");
  if (!cfg_.conv_trunk) {
    net::TensorF x({cfg_.obs_dim});
    x.values = obs;
    return x;
  }
  net::TensorF grid({cfg_.grid_channels, cfg_.grid_dims[0], cfg_.grid_dims[1],
                     cfg_.grid_dims[2]});
  std::copy(obs.begin(), obs.begin() + grid_flat_, grid.values.begin());
  net::TensorF enc = trunk_->forward(grid);
  net::TensorF feat({feat_dim_});
  std::copy(enc.values.begin(), enc.values.end(), feat.values.begin());
  std::copy(obs.begin() + grid_flat_, obs.end(),
            feat.values.begin() + cfg_.trunk_latent);
  return feat;
}

std::vector<double> ActorCritic::policy_mean(const std::vector<float>& obs) {
  net::TensorF mean = policy_->forward(encode_features(obs, true));
  return std::vector<double>(mean.values.begin(), mean.values.end());
}

std::vector<double> ActorCritic::log_std() const {
  return std::vector<double>(log_std_.values.begin(), log_std_.values.end());
}

double ActorCritic::value(const std::vector<float>& obs) {
  return static_cast<double>(value_->forward(encode_features(obs, false)).values[0]);
}

double ActorCritic::cost_value(int constraint, const std::vector<float>& obs) {
  return static_cast<double>(
      cost_values_[constraint]->forward(encode_features(obs, false)).values[0]);
}

void ActorCritic::backward_policy(const std::vector<double>& grad_mean,
                                  const std::vector<double>& grad_log_std) {
  net::TensorF g({cfg_.n_actions});
  for (int i = 0; i < cfg_.n_actions; ++i)
    g.values[i] = static_cast<float>(grad_mean[i]);
  net::TensorF dfeat = policy_->backward(g);
  if (cfg_.conv_trunk) {
    net::TensorF denc({cfg_.trunk_latent});
    std::copy(dfeat.values.begin(), dfeat.values.begin() + cfg_.trunk_latent,
              denc.values.begin());
    trunk_->backward(denc);
  }
  for (int i = 0; i < cfg_.n_actions; ++i)
    log_std_.grad[i] += static_cast<float>(grad_log_std[i]);
}

void ActorCritic::backward_value(double grad) {
  net::TensorF g({1});
  g.values[0] = static_cast<float>(grad);
  net::TensorF dfeat = value_->backward(g);
  if (cfg_.conv_trunk) {
    net::TensorF denc({cfg_.trunk_latent});
    std::copy(dfeat.values.begin(), dfeat.values.begin() + cfg_.trunk_latent,
              denc.values.begin());
    trunk_->backward(denc);
  }
}

void ActorCritic::backward_cost_value(int constraint, double grad) {
  net::TensorF g({1});
  g.values[0] = static_cast<float>(grad);
  net::TensorF dfeat = cost_values_[constraint]->backward(g);
  if (cfg_.conv_trunk) {
    net::TensorF denc({cfg_.trunk_latent});
    std::copy(dfeat.values.begin(), dfeat.values.begin() + cfg_.trunk_latent,
              denc.values.begin());
    trunk_->backward(denc);
  }
}

std::vector<net::ParamRef<float>> ActorCritic::params() {
  std::vector<net::ParamRef<float>> out;
  if (trunk_)
    for (auto& p : trunk_->params()) out.push_back(p);
  for (auto& p : policy_->params()) out.push_back(p);
  for (auto& p : value_->params()) out.push_back(p);
  for (auto& head : cost_values_)
    for (auto& p : head->params()) out.push_back(p);
  out.push_back({"pi.log_std", &log_std_});
  return out;
}

std::vector<net::CheckpointEntry> ActorCritic::snapshot() {
  return net::snapshot_params(params());
}

void ActorCritic::restore(const std::vector<net::CheckpointEntry>& entries) {
  net::restore_params(entries, params());
}

}  // namespace reflex::rl
