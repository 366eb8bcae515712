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

#ifndef REFLEX_RL_ENV_HPP_
#define REFLEX_RL_ENV_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "reflex/control/controller.hpp"
#include "reflex/kinematics/chain.hpp"
#include "reflex/perception/camera.hpp"
#include "reflex/perception/model.hpp"
#include "reflex/world/esdf.hpp"
#include "reflex/world/scenario.hpp"

namespace reflex::rl {

struct StepResult {
  std::vector<float> obs;
  double reward = 0.0;
  std::array<double, 4> costs = {0.0, 0.0, 0.0, 0.0};
  bool terminal = false;   // collision: episode absorbs
  bool truncated = false;  // time limit
};

/// Episodic CMDP interface shared by the manipulation env and test toys.
class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual std::vector<float> reset(std::uint64_t seed) = 0;
  /// Stepping a finished episode is a contract error.
  virtual StepResult step(const std::vector<double>& action) = 0;
  /// True once the episode's task objective has been met (valid until the
  /// next reset). Used for success-rate bookkeeping.
  virtual bool success() const = 0;
};

/// Reward terms at one transition; reward = sum of the four.
struct RewardTerms {
  double r_pos = 0.0;
  double r_ori = 0.0;
  double r_sm1 = 0.0;
  double r_sm2 = 0.0;

  double total() const { return r_pos + r_ori + r_sm1 + r_sm2; }
};

RewardTerms reward_terms(const Pose& ee, const Pose& target, const kin::VecX& q_des,
                         const kin::VecX& q_des_prev1, const kin::VecX& q_des_prev2);

/// How the policy observes the scene.
enum class ObsMode {
  kLatent,   // frozen perception encoder latent
  kRawGrid,  // raw grid channels, policy brings its own conv trunk
};

struct CmdpEnvConfig {
  kin::SerialChain chain;
  world::ScenarioRanges ranges;
  perception::CameraModel camera;
  perception::PerceptionConfig pcfg;
  ObsMode obs_mode = ObsMode::kLatent;
  int max_steps = 500;
  double dt = control::kDt;
  double action_bound = control::kActionBound;
  bool camera_noise = true;
  double waypoint_tolerance = 0.03;  // m, advance to next waypoint
  double init_limit_fraction = 0.7;  // reset q uniform within this limit span
  // Raw-grid variants: self-filter the observation (mapping baseline).
  bool self_filter_raw = false;
};

/// Desk-scale defaults: 3-DOF planar chain over an 8x12x8 grid.
CmdpEnvConfig make_desk_env_config();

class CmdpEnv : public Env {
 public:
  explicit CmdpEnv(const CmdpEnvConfig& cfg);

  int obs_dim() const override;
  int n_actions() const override { return cfg_.chain.n_joints; }
  std::vector<float> reset(std::uint64_t seed) override;
  StepResult step(const std::vector<double>& action) override;

  /// Installs frozen perception weights (kLatent mode). Must be called
  /// before reset when obs_mode is kLatent.
  void set_perception(std::shared_ptr<const std::vector<net::CheckpointEntry>> weights);

  // Introspection for benches and tests.
  const world::Scenario& scenario() const { return scenario_; }
  const kin::VecX& q() const { return q_; }
  const world::VoxelGrid& ground_truth_esdf() const { return esdf_; }
  const control::Command& command() const { return cmd_; }
  const RewardTerms& last_reward_terms() const { return last_terms_; }
  int steps_done() const { return t_; }
  bool waypoints_completed() const { return waypoints_done_; }
  bool success() const override { return waypoints_done_; }

 private:
  std::vector<float> observe();
  void refresh_ground_truth();

  CmdpEnvConfig cfg_;
  std::shared_ptr<const std::vector<net::CheckpointEntry>> weights_;
  std::unique_ptr<perception::PerceptionModel> model_;

  world::Scenario scenario_;
  world::VoxelGrid occupancy_;  // ground truth
  world::VoxelGrid esdf_;       // ground truth
  control::Command cmd_;
  control::ControllerState ctrl_;
  kin::VecX q_;
  world::VoxelGrid prev_pred_;  // recurrence channel / fused memory
  Rng noise_rng_{0};
  int t_ = 0;
  int waypoint_idx_ = 0;
  bool waypoints_done_ = false;
  bool done_ = false;
  RewardTerms last_terms_;
};

}  // namespace reflex::rl

#endif  // REFLEX_RL_ENV_HPP_
