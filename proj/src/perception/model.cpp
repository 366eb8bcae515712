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

#include "reflex/perception/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reflex/netcore/adam.hpp"

namespace reflex::perception {
namespace {

constexpr int kChannels[4] = {3, 8, 16, 32};  // input, conv1..3 outputs
constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

std::array<int, 3> conv_out(const std::array<int, 3>& in) {
  std::array<int, 3> out;
  for (int a = 0; a < 3; ++a) out[a] = (in[a] + 2 * kPad - kKernel) / kStride + 1;
  return out;
}

std::array<int, 3> transpose_opad(const std::array<int, 3>& in,
                                  const std::array<int, 3>& target) {
  std::array<int, 3> op;
  for (int a = 0; a < 3; ++a) {
    op[a] = target[a] - ((in[a] - 1) * kStride - 2 * kPad + kKernel);
    if (op[a] < 0 || op[a] >= kStride)
      throw std::invalid_argument("perception model: grid dims not invertible");
  }
  return op;
}

}  // namespace

void PerceptionConfig::validate() const {
  for (int d : grid_dims)
    if (d < 4) throw std::invalid_argument("perception config: grid dims too small");
  if (proprio_dim <= 0 || latent_dim <= 0 || mlp_hidden <= 0)
    throw std::invalid_argument("perception config: dims must be positive");
}

PerceptionModel::PerceptionModel(const PerceptionConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::array<int, 3> d1 = conv_out(cfg.grid_dims);
  const std::array<int, 3> d2 = conv_out(d1);
  const std::array<int, 3> d3 = conv_out(d2);
  bottleneck_dims_ = d3;
  flat_dim_ = kChannels[3] * d3[0] * d3[1] * d3[2];

  convs_ = std::make_unique<net::Sequential<float>>();
  for (int i = 0; i < 3; ++i) {
    convs_->add(std::make_unique<net::Conv3d<float>>(
        kChannels[i], kChannels[i + 1], kKernel, kStride, kPad, rng,
        "enc.conv" + std::to_string(i)));
    convs_->add(std::make_unique<net::ReLU<float>>());
  }
  mlp_ = net::make_mlp<float>({flat_dim_ + cfg.proprio_dim, cfg.mlp_hidden,
                               cfg.latent_dim},
                              rng, "enc.mlp");
  dec_fc_ = std::make_unique<net::Sequential<float>>();
  dec_fc_->add(std::make_unique<net::Dense<float>>(cfg.latent_dim, flat_dim_, rng,
                                                   "dec.fc"));
  dec_fc_->add(std::make_unique<net::ReLU<float>>());

  deconvs_ = std::make_unique<net::Sequential<float>>();
  const std::array<std::array<int, 3>, 3> stages = {d3, d2, d1};
  const std::array<std::array<int, 3>, 3> targets = {d2, d1, cfg.grid_dims};
  const int dec_channels[4] = {kChannels[3], kChannels[2], kChannels[1], 1};
  for (int i = 0; i < 3; ++i) {
    deconvs_->add(std::make_unique<net::ConvTranspose3d<float>>(
        dec_channels[i], dec_channels[i + 1], kKernel, kStride, kPad,
        transpose_opad(stages[i], targets[i]), rng, "dec.tconv" + std::to_string(i)));
    if (i < 2) deconvs_->add(std::make_unique<net::ReLU<float>>());
  }
  critic_ = std::make_unique<safety::SafetyCritic>(cfg.latent_dim, cfg.head_hidden, rng);
}

net::TensorF PerceptionModel::assemble_input(const ObservationGrid& obs,
                                             const world::VoxelGrid& prev) const {
  const auto& g = obs.occupancy;
  if (g.dims != cfg_.grid_dims)
    throw std::invalid_argument("perception model: observation dims mismatch");
  if (!prev.same_geometry(g))
    throw std::invalid_argument("perception model: prev prediction geometry mismatch");
  net::TensorF x({kChannels[0], g.dims[0], g.dims[1], g.dims[2]});
  x.values = pack_grid_channels(obs, prev);
  return x;
}

PerceptionOutput PerceptionModel::encode(const ObservationGrid& obs,
                                         const world::VoxelGrid& prev,
                                         const std::vector<float>& proprio) {
  if (static_cast<int>(proprio.size()) != cfg_.proprio_dim)
    throw std::invalid_argument("perception model: proprio size mismatch");
  net::TensorF x = assemble_input(obs, prev);
  net::TensorF feat = convs_->forward(x);
  last_conv_flat_ = static_cast<int>(feat.numel());

  net::TensorF joined({last_conv_flat_ + cfg_.proprio_dim});
  std::copy(feat.values.begin(), feat.values.end(), joined.values.begin());
  std::copy(proprio.begin(), proprio.end(), joined.values.begin() + last_conv_flat_);
  net::TensorF latent = mlp_->forward(joined);

  net::TensorF dec = dec_fc_->forward(latent);
  net::TensorF grid_in = dec.reshaped({kChannels[3], bottleneck_dims_[0],
                                       bottleneck_dims_[1], bottleneck_dims_[2]});
  last_logits_ = deconvs_->forward(grid_in);
  have_pass_ = true;

  PerceptionOutput out;
  out.latent.assign(latent.values.begin(), latent.values.end());
  out.predicted_occupancy =
      world::VoxelGrid(obs.occupancy.origin, obs.occupancy.resolution, obs.occupancy.dims);
  const auto& g = out.predicted_occupancy;
  for (int i = 0; i < g.dims[0]; ++i)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int k = 0; k < g.dims[2]; ++k) {
        const std::size_t src =
            (static_cast<std::size_t>(i) * g.dims[1] + j) * g.dims[2] + k;
        out.predicted_occupancy.cells[g.index(i, j, k)] =
            1.0 / (1.0 + std::exp(-static_cast<double>(last_logits_.values[src])));
      }
  out.v_body = critic_->value_body(out.latent);
  out.v_tool = critic_->value_tool(out.latent);
  return out;
}

double PerceptionModel::backward_reconstruction(const world::VoxelGrid& label) {
  if (!have_pass_)
    throw std::logic_error("perception model: call encode() before backward");
  if (label.dims != cfg_.grid_dims)
    throw std::invalid_argument("perception model: label dims mismatch");
  const std::size_t n = last_logits_.numel();
  net::TensorF dlogits(last_logits_.dims);
  double loss = 0.0;
  for (int i = 0; i < label.dims[0]; ++i)
    for (int j = 0; j < label.dims[1]; ++j)
      for (int k = 0; k < label.dims[2]; ++k) {
        const std::size_t idx =
            (static_cast<std::size_t>(i) * label.dims[1] + j) * label.dims[2] + k;
        const double z = static_cast<double>(last_logits_.values[idx]);
        const double y = label.cells[label.index(i, j, k)];
        const double p = 1.0 / (1.0 + std::exp(-z));
        // Numerically stable BCE on logits.
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        dlogits.values[idx] = static_cast<float>((p - y) / static_cast<double>(n));
      }
  loss /= static_cast<double>(n);

  net::TensorF dgrid = deconvs_->backward(dlogits);
  net::TensorF ddec = dec_fc_->backward(dgrid.reshaped({flat_dim_}));
  net::TensorF djoined = mlp_->backward(ddec);
  net::TensorF dfeat({last_conv_flat_});
  std::copy(djoined.values.begin(), djoined.values.begin() + last_conv_flat_,
            dfeat.values.begin());
  const std::array<int, 3> d1 = conv_out(cfg_.grid_dims);
  const std::array<int, 3> d2 = conv_out(d1);
  const std::array<int, 3> d3 = conv_out(d2);
  convs_->backward(dfeat.reshaped({kChannels[3], d3[0], d3[1], d3[2]}));
  return loss;
}

std::vector<net::ParamRef<float>> PerceptionModel::params() {
  auto out = autoenc_params();
  for (auto& p : critic_->params()) out.push_back(p);
  return out;
}

std::vector<net::ParamRef<float>> PerceptionModel::autoenc_params() {
  std::vector<net::ParamRef<float>> out;
  for (auto* seq : {convs_.get(), mlp_.get(), dec_fc_.get(), deconvs_.get()})
    for (auto& p : seq->params()) out.push_back(p);
  return out;
}

std::vector<net::CheckpointEntry> PerceptionModel::snapshot() {
  return net::snapshot_params(params());
}

void PerceptionModel::restore(const std::vector<net::CheckpointEntry>& entries) {
  net::restore_params(entries, params());
}

std::unique_ptr<PerceptionModel> PerceptionModel::clone() const {
  Rng rng(0);
  auto copy = std::make_unique<PerceptionModel>(cfg_, rng);
  auto* self = const_cast<PerceptionModel*>(this);
  copy->restore(self->snapshot());
  return copy;
}

std::vector<double> pretrain_reconstruction(PerceptionModel& model,
                                            const std::vector<ReconSample>& samples,
                                            const PretrainOptions& opts) {
  if (samples.empty())
    throw std::invalid_argument("pretrain_reconstruction: empty dataset");
  net::Adam<float> adam(model.autoenc_params(), opts.lr);
  Rng rng(opts.seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
    double total = 0.0;
    for (int idx : order) {
      const ReconSample& s = samples[idx];
      adam.zero_grad();
      model.encode(s.obs, s.prev, s.proprio);
      total += model.backward_reconstruction(s.label);
      adam.step();
    }
    losses.push_back(total / static_cast<double>(samples.size()));
  }
  return losses;
}

double occupancy_iou(const world::VoxelGrid& predicted, const world::VoxelGrid& label,
                     double threshold) {
  if (!predicted.same_geometry(label))
    throw std::invalid_argument("occupancy_iou: geometry mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < predicted.cells.size(); ++i) {
    const bool p = predicted.cells[i] >= threshold;
    const bool l = label.cells[i] >= 0.5;
    inter += (p && l) ? 1 : 0;
    uni += (p || l) ? 1 : 0;
  }
  if (uni == 0) return 1.0;  // both empty
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace reflex::perception
