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

#ifndef REFLEX_RL_P3O_HPP_
#define REFLEX_RL_P3O_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "reflex/netcore/adam.hpp"
#include "reflex/rl/actor_critic.hpp"
#include "reflex/rl/env.hpp"
#include "reflex/rl/gae.hpp"

namespace reflex::rl {

/// Penalized constrained PPO: clipped reward surrogate plus, per constraint,
/// kappa_i * relu(clipped cost surrogate + J_hat_Ci - eps_i). Gates close
/// exactly, so an inactive constraint leaves the update bitwise equal to
/// plain PPO on the same batch.
struct CmdpConfig {
  double gamma = 0.99;
  double lambda_gae = 0.95;
  std::array<double, kNumConstraints> cost_limits = {0.01, 0.01, 0.05, 0.05};
  std::array<double, kNumConstraints> kappa = {20.0, 20.0, 20.0, 20.0};
  double clip_ratio = 0.2;
  int epochs = 10;
  int minibatch = 256;
  int horizon = 256;
  int n_envs = 16;
  double lr = 3e-4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int n_workers = 1;

  void validate() const;
};

/// Fixed-size on-policy segment, env-major layout (row e*horizon + t).
/// Rewards and costs at truncated steps already include the gamma * V
/// bootstrap of the pre-reset observation, so GAE can treat truncation as
/// termination without a separate code path.
struct RolloutBatch {
  int n_envs = 0;
  int horizon = 0;
  int obs_dim = 0;
  int n_actions = 0;

  std::vector<float> obs;        // [n, obs_dim]
  std::vector<double> actions;   // [n, n_actions]
  std::vector<double> logp;      // [n] behavior-policy log-probs
  std::vector<double> rewards;   // [n]
  std::array<std::vector<double>, kNumConstraints> costs;
  std::vector<double> dones;     // [n] 1 at terminal or truncated steps
  std::vector<double> values;    // [n] reward critic at collection time
  std::array<std::vector<double>, kNumConstraints> cost_values;
  std::vector<double> bootstrap_value;  // [n_envs] V at segment end
  std::array<std::vector<double>, kNumConstraints> bootstrap_cost;
  std::vector<std::uint8_t> episode_start;  // [n]

  int episodes_ended = 0;
  int episodes_succeeded = 0;

  int size() const { return n_envs * horizon; }
};

/// Persistent rollout slot; episodes continue across segments. Each slot owns
/// its env and exploration rng, so results do not depend on worker count.
struct EnvSlot {
  std::unique_ptr<Env> env;
  std::uint64_t base_seed = 0;
  std::uint64_t episode = 0;
  Rng action_rng{0};
  std::vector<float> obs;
  bool fresh = true;  // reset before the next step
};

std::vector<EnvSlot> make_env_slots(
    const std::function<std::unique_ptr<Env>(int)>& factory, int n_envs,
    std::uint64_t seed);

/// Runs cfg.horizon steps in every slot under the current policy. Workers
/// get parameter clones; only forward caches of `policy` are touched.
RolloutBatch collect_rollouts(ActorCritic& policy, std::vector<EnvSlot>& slots,
                              const CmdpConfig& cfg);

struct AdvantageSet {
  std::vector<double> adv_r;  // normalized over the batch
  std::vector<double> ret_r;
  std::array<std::vector<double>, kNumConstraints> adv_c;  // raw
  std::array<std::vector<double>, kNumConstraints> ret_c;
  // Empirical discounted cost returns J_hat_Ci, averaged over episode-start
  // steps (over all steps when the segment contains no episode start).
  std::array<double, kNumConstraints> jc{};
};

AdvantageSet compute_advantages(const RolloutBatch& batch, const CmdpConfig& cfg);

struct P3oStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_reward = 0.0;
  std::array<double, kNumConstraints> jc{};
  std::array<bool, kNumConstraints> penalty_active{};
  double ratio_error = 0.0;  // max |ratio - 1| over the first minibatch
  double grad_norm = 0.0;    // pre-clip norm of the last minibatch
  bool aborted = false;      // NaN in a loss; parameters were rolled back
  int episodes = 0;
  int successes = 0;
};

/// One full P3O update (all epochs) on a collected batch. Asserts that the
/// importance ratio is 1 at the start of the first epoch. A NaN loss aborts
/// the update and restores the pre-update parameters.
P3oStats p3o_update(ActorCritic& ac, net::Adam<float>& opt, const RolloutBatch& batch,
                    const CmdpConfig& cfg, Rng& shuffle_rng);

struct TrainOptions {
  CmdpConfig cmdp;
  int updates = 100;
  std::uint64_t seed = 0;
  std::string progress_csv;      // empty: no CSV
  std::string checkpoint_path;   // empty: no checkpoint
  int checkpoint_every = 0;      // 0: only at the end
  bool verbose = false;
};

struct TrainSummary {
  int updates_done = 0;
  double final_mean_reward = 0.0;
  std::array<double, kNumConstraints> final_jc{};
  int episodes = 0;    // totals over the run
  int successes = 0;
};

/// Rollout/update loop with CSV progress and checkpointing. Deterministic for
/// a fixed (config, seed) at any worker count.
TrainSummary train_p3o(ActorCritic& ac,
                       const std::function<std::unique_ptr<Env>(int)>& env_factory,
                       const TrainOptions& opts);

struct EvalResult {
  int episodes = 0;
  int successes = 0;
  double mean_reward = 0.0;  // per-step average
  std::array<double, kNumConstraints> mean_discounted_cost{};
  double success_rate() const {
    return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
  }
};

/// Greedy (mean-action) evaluation over fresh episodes with derived seeds.
EvalResult evaluate_policy(Env& env, ActorCritic& policy, int episodes,
                           std::uint64_t seed, double gamma);

}  // namespace reflex::rl

#endif  // REFLEX_RL_P3O_HPP_
