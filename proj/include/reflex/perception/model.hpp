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

#ifndef REFLEX_PERCEPTION_MODEL_HPP_
#define REFLEX_PERCEPTION_MODEL_HPP_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "reflex/netcore/checkpoint.hpp"
#include "reflex/netcore/conv.hpp"
#include "reflex/netcore/layers.hpp"
#include "reflex/perception/observation.hpp"
#include "reflex/safety/safety.hpp"
#include "reflex/world/voxel_grid.hpp"

namespace reflex::perception {

struct PerceptionConfig {
  std::array<int, 3> grid_dims = {12, 20, 12};
  int proprio_dim = 37;
  int latent_dim = 128;
  int mlp_hidden = 256;
  std::vector<int> head_hidden = {64};

  void validate() const;
};

struct PerceptionOutput {
  std::vector<float> latent;
  world::VoxelGrid predicted_occupancy;  // sigmoid probabilities in [0,1]
  double v_body = 0.0;                   // squashed safety values in [0,1]
  double v_tool = 0.0;
};

/// Voxel encoder-decoder with proprioceptive conditioning and safety-critic
/// heads branching from the latent. Input channels: observed occupancy,
/// unknown mask, previous prediction. Three stride-2 convolutions
/// (8, 16, 32 channels), a two-layer perceptron to the latent, and a
/// mirrored transposed-convolution decoder back to grid logits.
class PerceptionModel {
 public:
  PerceptionModel(const PerceptionConfig& cfg, Rng& rng);

  PerceptionModel(const PerceptionModel&) = delete;
  PerceptionModel& operator=(const PerceptionModel&) = delete;

  /// Pure inference. Deterministic given weights and inputs; caches the pass
  /// so a training step may call backward_* afterwards.
  PerceptionOutput encode(const ObservationGrid& obs, const world::VoxelGrid& prev,
                          const std::vector<float>& proprio);

  /// Mean binary cross-entropy of the cached decoder logits against a {0,1}
  /// label grid, accumulating gradients through decoder, perceptron, and
  /// convolutions. Call encode() first.
  double backward_reconstruction(const world::VoxelGrid& label);

  const PerceptionConfig& config() const { return cfg_; }
  safety::SafetyCritic& critic() { return *critic_; }

  std::vector<net::ParamRef<float>> params();          // everything
  std::vector<net::ParamRef<float>> autoenc_params();  // encoder + decoder only

  std::vector<net::CheckpointEntry> snapshot();
  void restore(const std::vector<net::CheckpointEntry>& entries);
  std::unique_ptr<PerceptionModel> clone() const;

 private:
  net::TensorF assemble_input(const ObservationGrid& obs,
                              const world::VoxelGrid& prev) const;

  PerceptionConfig cfg_;
  std::array<int, 3> bottleneck_dims_;
  int flat_dim_ = 0;

  std::unique_ptr<net::Sequential<float>> convs_;
  std::unique_ptr<net::Sequential<float>> mlp_;
  std::unique_ptr<net::Sequential<float>> dec_fc_;
  std::unique_ptr<net::Sequential<float>> deconvs_;
  std::unique_ptr<safety::SafetyCritic> critic_;

  // Cached pass state for backward_reconstruction.
  net::TensorF last_logits_;
  int last_conv_flat_ = 0;
  bool have_pass_ = false;
};

/// One supervised reconstruction example.
struct ReconSample {
  ObservationGrid obs;
  world::VoxelGrid prev;
  std::vector<float> proprio;
  world::VoxelGrid label;
};

struct PretrainOptions {
  int epochs = 30;
  double lr = 1e-3;
  unsigned long long seed = 7;
};

/// Autoencoder pretraining on reconstruction BCE. Returns per-epoch mean
/// loss. Safety heads are fitted separately on frozen latents via
/// safety::fit_safety_critic.
std::vector<double> pretrain_reconstruction(PerceptionModel& model,
                                            const std::vector<ReconSample>& samples,
                                            const PretrainOptions& opts);

/// Voxelwise intersection-over-union of thresholded prediction vs labels.
double occupancy_iou(const world::VoxelGrid& predicted, const world::VoxelGrid& label,
                     double threshold = 0.5);

}  // namespace reflex::perception

#endif  // REFLEX_PERCEPTION_MODEL_HPP_
