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

#include "reflex/rl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reflex/kinematics/ik.hpp"

namespace reflex::rl {

RewardTerms reward_terms(const Pose& ee, const Pose& target, const kin::VecX& q_des,
                         const kin::VecX& q_des_prev1, const kin::VecX& q_des_prev2) {
  RewardTerms t;
  const double pos_sq = (target.position - ee.position).squaredNorm();
  t.r_pos = 1.0 - std::clamp(pos_sq, 0.0, 1.0);
  t.r_ori = 1.0 - orientation_distance(ee.orientation, target.orientation);
  t.r_sm1 = -1e-3 * (q_des - q_des_prev1).squaredNorm();
  t.r_sm2 = -1e-4 * (q_des - 2.0 * q_des_prev1 + q_des_prev2).squaredNorm();
  return t;
}

CmdpEnvConfig make_desk_env_config() {
  CmdpEnvConfig cfg;
  cfg.chain = kin::make_planar3_desk();

  cfg.ranges.workspace_origin = Vec3(-0.2, -0.3, 0.0);
  cfg.ranges.workspace_size = Vec3(0.4, 0.6, 0.4);
  cfg.ranges.resolution = 0.05;
  cfg.ranges.table_height = 0.05;
  cfg.ranges.min_obstacles = 1;
  cfg.ranges.max_obstacles = 2;
  cfg.ranges.footprint_range = Eigen::Vector2d(0.04, 0.10);
  cfg.ranges.height_range = Eigen::Vector2d(0.12, 0.35);
  cfg.ranges.speed_range = Eigen::Vector2d(0.0, 0.0);
  cfg.ranges.target_radius_range = Eigen::Vector2d(0.16, 0.34);
  cfg.ranges.target_z = 0.22;
  cfg.ranges.base_clear_radius = 0.10;
  cfg.ranges.target_clearance = 0.08;
  cfg.ranges.tool_size_max = Vec3(0.12, 0.12, 0.12);
  cfg.ranges.tool_offset_range = Vec3(0.05, 0.05, 0.05);

  cfg.camera.pose.position = Vec3(0.0, -0.75, 0.55);
  const Vec3 look_target(0.0, 0.0, 0.15);
  const Vec3 f = (look_target - cfg.camera.pose.position).normalized();
  const Vec3 x = f.cross(Vec3::UnitZ()).normalized();
  Eigen::Matrix3d rot;
  rot.col(0) = x;
  rot.col(1) = f.cross(x);  // image-down
  rot.col(2) = f;
  cfg.camera.pose.orientation = Quat(rot).normalized();
  cfg.camera.fov_h = 1.2;
  cfg.camera.fov_v = 1.0;
  cfg.camera.width = 64;
  cfg.camera.height = 48;
  cfg.camera.max_range = 2.0;

  cfg.pcfg.grid_dims = {8, 12, 8};
  cfg.pcfg.proprio_dim = control::proprio_dim(cfg.chain.n_joints);
  cfg.pcfg.latent_dim = 128;
  return cfg;
}

CmdpEnv::CmdpEnv(const CmdpEnvConfig& cfg) : cfg_(cfg) {
  cfg_.chain.validate();
  cfg_.camera.validate();
  for (int a = 0; a < 3; ++a) {
    const int cells = static_cast<int>(
        std::lround(cfg_.ranges.workspace_size[a] / cfg_.ranges.resolution));
    if (cells != cfg_.pcfg.grid_dims[a])
      throw std::invalid_argument("cmdp env: grid dims do not match workspace");
  }
  if (cfg_.pcfg.proprio_dim != control::proprio_dim(cfg_.chain.n_joints))
    throw std::invalid_argument("cmdp env: proprio_dim mismatch");
}

void CmdpEnv::set_perception(
    std::shared_ptr<const std::vector<net::CheckpointEntry>> weights) {
  weights_ = std::move(weights);
  Rng init(0);
  model_ = std::make_unique<perception::PerceptionModel>(cfg_.pcfg, init);
  model_->restore(*weights_);
}

int CmdpEnv::obs_dim() const {
  const int proprio = control::proprio_dim(cfg_.chain.n_joints);
  if (cfg_.obs_mode == ObsMode::kLatent) return cfg_.pcfg.latent_dim + proprio;
  const auto& d = cfg_.pcfg.grid_dims;
  return 3 * d[0] * d[1] * d[2] + proprio;
}

void CmdpEnv::refresh_ground_truth() {
  occupancy_ = world::rasterize(scenario_.scene, cfg_.ranges.resolution,
                                cfg_.pcfg.grid_dims);
  esdf_ = world::compute_esdf(occupancy_);
}

std::vector<float> CmdpEnv::reset(std::uint64_t seed) {
  if (cfg_.obs_mode == ObsMode::kLatent && !model_)
    throw std::logic_error("cmdp env: set_perception before reset in latent mode");

  Rng scenario_rng = Rng::derive(seed, 1);
  Rng init_rng = Rng::derive(seed, 2);
  noise_rng_ = Rng::derive(seed, 3);

  // Re-sample until every waypoint is confirmed IK-reachable.
  const kin::VecX q_neutral = kin::VecX::Zero(cfg_.chain.n_joints);
  for (int attempt = 0;; ++attempt) {
    scenario_ = world::sample_scenario(scenario_rng, cfg_.ranges);
    bool ok = true;
    for (const Pose& wp : scenario_.waypoints) {
      kin::IkOptions opts;
      opts.max_iters = 150;
      opts.tol_pos = 1e-6;
      opts.tol_rot = 1e-5;
      if (!kin::solve_ik(cfg_.chain, q_neutral, wp, opts).converged) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    if (attempt >= 30)
      throw world::ScenarioError("cmdp env: no reachable waypoint set found");
  }
  refresh_ground_truth();

  // Collision-free initial configuration within a fraction of the limits.
  q_ = kin::VecX::Zero(cfg_.chain.n_joints);
  for (int attempt = 0; attempt < 50; ++attempt) {
    kin::VecX q(cfg_.chain.n_joints);
    for (int i = 0; i < cfg_.chain.n_joints; ++i) {
      const double lo = cfg_.chain.joint_limits_lo[i] * cfg_.init_limit_fraction;
      const double hi = cfg_.chain.joint_limits_hi[i] * cfg_.init_limit_fraction;
      q[i] = init_rng.uniform(lo, hi);
    }
    bool clear = true;
    for (const auto& s : kin::body_spheres_world(cfg_.chain, q)) {
      if (world::grid_sample(esdf_, s.center).value < s.radius + 0.01) {
        clear = false;
        break;
      }
    }
    if (clear) {
      const kin::FkResult fk = kin::forward_kinematics(cfg_.chain, q);
      if (!control::tool_corner_violation(esdf_, fk.ee, scenario_.tool)) {
        q_ = q;
        break;
      }
    }
  }

  cmd_.target = scenario_.waypoints.front();
  cmd_.mode = scenario_.mode;
  cmd_.tool = scenario_.tool;
  ctrl_.reset(q_);
  prev_pred_ = world::VoxelGrid(cfg_.ranges.workspace_origin, cfg_.ranges.resolution,
                                cfg_.pcfg.grid_dims, 0.5);
  t_ = 0;
  waypoint_idx_ = 0;
  waypoints_done_ = false;
  done_ = false;
  last_terms_ = RewardTerms{};
  return observe();
}

std::vector<float> CmdpEnv::observe() {
  const kin::FkResult fk = kin::forward_kinematics(cfg_.chain, q_);
  const auto spheres = kin::body_spheres_world(cfg_.chain, fk);
  const perception::DepthImage depth =
      perception::render_depth(cfg_.camera, scenario_.scene, spheres, cmd_.tool,
                               fk.ee, cfg_.camera_noise ? &noise_rng_ : nullptr);
  const std::vector<Vec3> cloud = perception::depth_to_cloud(cfg_.camera, depth);
  perception::ObservationGrid obs = perception::voxelize_observation(
      cloud, cfg_.camera.pose.position, cfg_.ranges.workspace_origin,
      cfg_.ranges.resolution, cfg_.pcfg.grid_dims);

  if (cfg_.obs_mode == ObsMode::kLatent) {
    const perception::PerceptionOutput out =
        model_->encode(obs, prev_pred_, control::build_proprio(ctrl_, cmd_));
    prev_pred_ = out.predicted_occupancy;
    return control::build_observation(out.latent, ctrl_, cmd_);
  }

  if (cfg_.self_filter_raw)
    obs = perception::filter_self(obs, spheres, cmd_.tool, fk.ee);
  prev_pred_ = perception::fuse_memory(prev_pred_, obs);
  std::vector<float> vec = perception::pack_grid_channels(obs, prev_pred_);
  const std::vector<float> proprio = control::build_proprio(ctrl_, cmd_);
  vec.insert(vec.end(), proprio.begin(), proprio.end());
  return vec;
}

StepResult CmdpEnv::step(const std::vector<double>& action) {
  if (done_) throw std::logic_error("cmdp env: step after episode end");
  if (static_cast<int>(action.size()) != cfg_.chain.n_joints)
    throw std::invalid_argument("cmdp env: action size mismatch");

  kin::VecX a(cfg_.chain.n_joints);
  for (int i = 0; i < a.size(); ++i) a[i] = action[i];
  const kin::VecX q_des =
      control::policy_step(cfg_.chain, q_, a, cfg_.action_bound);
  const kin::VecX q_next = kin::rate_limit(cfg_.chain, q_, q_des, cfg_.dt);

  last_terms_ = reward_terms(kin::forward_kinematics(cfg_.chain, q_next).ee,
                             cmd_.target, q_des, ctrl_.q_des_prev1,
                             ctrl_.q_des_prev2);
  ctrl_.push_command(q_des);

  bool moving = false;
  for (const auto& o : scenario_.scene.obstacles)
    if (o.velocity.squaredNorm() > 0.0) moving = true;
  if (moving) {
    scenario_.scene = world::step_obstacles(scenario_.scene, cfg_.dt);
    refresh_ground_truth();
  }

  StepResult res;
  res.costs = control::constraint_costs(cfg_.chain, esdf_, q_, q_next, cmd_, cfg_.dt);
  q_ = q_next;
  ctrl_.push_joint(q_);
  res.reward = last_terms_.total();

  const kin::FkResult fk = kin::forward_kinematics(cfg_.chain, q_);
  if ((fk.ee.position - cmd_.target.position).norm() < cfg_.waypoint_tolerance) {
    if (waypoint_idx_ + 1 < static_cast<int>(scenario_.waypoints.size())) {
      ++waypoint_idx_;
      cmd_.target = scenario_.waypoints[static_cast<std::size_t>(waypoint_idx_)];
    } else {
      waypoints_done_ = true;
    }
  }

  ++t_;
  res.terminal = res.costs[0] == 1.0;
  res.truncated = !res.terminal && t_ >= cfg_.max_steps;
  done_ = res.terminal || res.truncated;
  res.obs = observe();
  return res;
}

}  // namespace reflex::rl
