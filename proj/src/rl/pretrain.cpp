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

#include "reflex/rl/pretrain.hpp"

#include <algorithm>
#include <cmath>

#include "reflex/world/esdf.hpp"
#include "reflex/world/scene.hpp"

namespace reflex::rl {

PretrainDataset collect_pretrain_dataset(const PretrainConfig& cfg) {
  const CmdpEnvConfig& ec = cfg.env;
  const auto& dims = ec.pcfg.grid_dims;
  PretrainDataset data;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Rng scen_rng = Rng::derive(cfg.seed, 1000 + static_cast<std::uint64_t>(ep));
    Rng init_rng = Rng::derive(cfg.seed, 2000 + static_cast<std::uint64_t>(ep));
    Rng noise_rng = Rng::derive(cfg.seed, 3000 + static_cast<std::uint64_t>(ep));

    world::Scenario scenario = world::sample_scenario(scen_rng, ec.ranges);
    world::VoxelGrid occupancy =
        world::rasterize(scenario.scene, ec.ranges.resolution, dims);
    world::VoxelGrid esdf = world::compute_esdf(occupancy);
    world::VoxelGrid labels = perception::make_training_labels(
        scenario.scene, ec.ranges.resolution, dims);

    kin::VecX q = kin::VecX::Zero(ec.chain.n_joints);
    for (int attempt = 0; attempt < 50; ++attempt) {
      kin::VecX cand(ec.chain.n_joints);
      for (int i = 0; i < ec.chain.n_joints; ++i)
        cand[i] = init_rng.uniform(ec.chain.joint_limits_lo[i] * ec.init_limit_fraction,
                                   ec.chain.joint_limits_hi[i] * ec.init_limit_fraction);
      if (!control::body_collision(esdf, kin::body_spheres_world(ec.chain, cand))) {
        q = cand;
        break;
      }
    }

    control::Command cmd;
    cmd.target = scenario.waypoints.front();
    cmd.mode = scenario.mode;
    cmd.tool = scenario.tool;
    control::ControllerState ctrl;
    ctrl.reset(q);

    world::VoxelGrid fused(ec.ranges.workspace_origin, ec.ranges.resolution, dims, 0.5);
    std::size_t waypoint = 0;

    const int ep_first_frame = static_cast<int>(data.frames.size());
    int step_in_ep = 0;
    bool violated = false;

    for (int t = 0; t < cfg.steps_per_episode && !violated; ++t) {
      const kin::FkResult fk = kin::forward_kinematics(ec.chain, q);
      const auto spheres = kin::body_spheres_world(ec.chain, fk);

      const perception::DepthImage depth = perception::render_depth(
          ec.camera, scenario.scene, spheres, cmd.tool, fk.ee,
          ec.camera_noise ? &noise_rng : nullptr);
      const std::vector<Vec3> cloud = perception::depth_to_cloud(ec.camera, depth);
      perception::ObservationGrid obs = perception::voxelize_observation(
          cloud, ec.camera.pose.position, ec.ranges.workspace_origin,
          ec.ranges.resolution, dims);

      perception::ReconSample frame;
      frame.obs = obs;
      frame.prev = fused;  // memory state before this observation
      frame.proprio = control::build_proprio(ctrl, cmd);
      frame.label = cfg.labels_from_observation ? obs.occupancy : labels;
      data.frames.push_back(std::move(frame));
      data.in_recon_set.push_back(step_in_ep % cfg.frame_stride == 0 ? 1 : 0);

      fused = perception::fuse_memory(fused, obs);

      const bool c_body = control::body_collision(esdf, spheres);
      // Tool flag ignores the interaction mode: aggregation gates it later.
      const bool c_tool = control::tool_corner_violation(esdf, fk.ee, cmd.tool);
      violated = c_body || c_tool;

      const int frame_idx = ep_first_frame + step_in_ep;
      if (step_in_ep > 0) {
        data.pair_from.push_back(frame_idx - 1);
        data.pair_to.push_back(frame_idx);
        data.pair_c_body.push_back(0.0f);
        data.pair_c_tool.push_back(0.0f);
        data.pair_terminal.push_back(0);
      }
      if (violated) {
        // Absorbing violation: the state itself carries the flag.
        data.pair_from.push_back(frame_idx);
        data.pair_to.push_back(frame_idx);
        data.pair_c_body.push_back(c_body ? 1.0f : 0.0f);
        data.pair_c_tool.push_back(c_tool ? 1.0f : 0.0f);
        data.pair_terminal.push_back(1);
      }
      ++step_in_ep;
      if (violated) break;

      const kin::VecX q_des = control::nominal_step(ec.chain, q, cmd, ec.dt);
      ctrl.push_command(q_des);
      q = q_des;
      ctrl.push_joint(q);

      if ((fk.ee.position - cmd.target.position).norm() < ec.waypoint_tolerance &&
          waypoint + 1 < scenario.waypoints.size()) {
        ++waypoint;
        cmd.target = scenario.waypoints[waypoint];
      }
    }

    // Truncated episode: mark the last recorded transition as a safe end so
    // the fit does not bootstrap past the data.
    if (!violated && !data.pair_terminal.empty() && step_in_ep > 1)
      data.pair_terminal.back() = 1;
  }
  return data;
}

PretrainResult pretrain_encoder(const PretrainConfig& cfg) {
  PretrainDataset data = collect_pretrain_dataset(cfg);

  PretrainResult res;
  res.recon_samples = static_cast<int>(
      std::count(data.in_recon_set.begin(), data.in_recon_set.end(), 1));
  res.safety_samples = static_cast<int>(data.pair_from.size());

  Rng model_rng = Rng::derive(cfg.seed, 42);
  perception::PerceptionModel model(cfg.env.pcfg, model_rng);

  std::vector<perception::ReconSample> recon;
  recon.reserve(static_cast<std::size_t>(res.recon_samples));
  for (std::size_t i = 0; i < data.frames.size(); ++i)
    if (data.in_recon_set[i]) recon.push_back(data.frames[i]);

  perception::PretrainOptions aopts = cfg.autoenc;
  aopts.seed = Rng::derive(cfg.seed, 43).next_u64();
  res.autoenc_losses = perception::pretrain_reconstruction(model, recon, aopts);

  double iou = 0.0;
  for (const auto& s : recon) {
    const perception::PerceptionOutput out = model.encode(s.obs, s.prev, s.proprio);
    iou += perception::occupancy_iou(out.predicted_occupancy, s.label);
  }
  res.train_iou = recon.empty() ? 0.0 : iou / static_cast<double>(recon.size());

  // Latents under the frozen encoder feed the safety heads.
  std::vector<std::vector<float>> latents(data.frames.size());
  for (std::size_t i = 0; i < data.frames.size(); ++i) {
    const auto& f = data.frames[i];
    latents[i] = model.encode(f.obs, f.prev, f.proprio).latent;
  }
  std::vector<safety::SafetySample> pairs(data.pair_from.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].features = latents[static_cast<std::size_t>(data.pair_from[i])];
    pairs[i].next_features = latents[static_cast<std::size_t>(data.pair_to[i])];
    pairs[i].c_body = data.pair_c_body[i];
    pairs[i].c_tool = data.pair_c_tool[i];
    pairs[i].terminal = data.pair_terminal[i] != 0;
  }

  safety::FitOptions sopts = cfg.safety;
  sopts.seed = Rng::derive(cfg.seed, 44).next_u64();
  res.safety_losses = safety::fit_safety_critic(model.critic(), pairs, sopts).epoch_loss;

  res.weights = model.snapshot();
  return res;
}

}  // namespace reflex::rl
