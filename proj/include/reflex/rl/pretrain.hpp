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

#ifndef REFLEX_RL_PRETRAIN_HPP_
#define REFLEX_RL_PRETRAIN_HPP_

#include <cstdint>
#include <vector>

#include "reflex/netcore/checkpoint.hpp"
#include "reflex/perception/model.hpp"
#include "reflex/rl/env.hpp"
#include "reflex/safety/safety.hpp"

namespace reflex::rl {

/// Supervised perception pretraining on nominal-controller rollouts:
/// autoencoder first, then safety heads fitted on latents from the frozen
/// encoder. During collection the deterministic fused memory stands in for
/// the previous-prediction input channel.
struct PretrainConfig {
  CmdpEnvConfig env;  // chain, scenario ranges, camera, grid sizes
  int episodes = 24;
  int steps_per_episode = 120;
  int frame_stride = 5;  // reconstruction-set subsampling
  perception::PretrainOptions autoenc;
  safety::FitOptions safety;
  // Ablation: reconstruct the observed occupancy instead of the ground-truth
  // collidable region (plain autoencoder, no hallucination target).
  bool labels_from_observation = false;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  std::vector<net::CheckpointEntry> weights;  // full perception model snapshot
  std::vector<double> autoenc_losses;         // per-epoch mean BCE
  std::vector<double> safety_losses;          // per-epoch mean squared TD error
  double train_iou = 0.0;                     // reconstruction vs labels
  int recon_samples = 0;
  int safety_samples = 0;
};

PretrainResult pretrain_encoder(const PretrainConfig& cfg);

/// Collects the raw supervision set without training (exposed for tests).
struct PretrainDataset {
  std::vector<perception::ReconSample> frames;  // every recorded state, in order
  std::vector<std::uint8_t> in_recon_set;       // 1 where the frame joins the recon set
  // Per transition: frame indices and violation flags at the source state.
  // Latent features are computed against the frozen encoder after
  // autoencoder training, then handed to safety::fit_safety_critic.
  std::vector<int> pair_from;
  std::vector<int> pair_to;
  std::vector<float> pair_c_body;
  std::vector<float> pair_c_tool;
  std::vector<std::uint8_t> pair_terminal;
};

PretrainDataset collect_pretrain_dataset(const PretrainConfig& cfg);

}  // namespace reflex::rl

#endif  // REFLEX_RL_PRETRAIN_HPP_
