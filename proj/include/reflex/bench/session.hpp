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

#ifndef REFLEX_BENCH_SESSION_HPP_
#define REFLEX_BENCH_SESSION_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "reflex/bench/config.hpp"
#include "reflex/core/csv.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/netcore/checkpoint.hpp"
#include "reflex/rl/actor_critic.hpp"

namespace reflex::bench {

enum class Method { kHybridRl, kApf, kMppi };

/// What the avoidance controller is allowed to know about the obstacles.
/// kFused is the learned pipeline and only pairs with kHybridRl; the other
/// three feed the classical planners.
enum class PerceptionSource { kGroundTruth, kClusters, kEsdf, kFused };

enum class TrialOutcome { kSuccess, kCollision, kToolViolation, kTimeout };

const char* method_name(Method m);
const char* perception_name(PerceptionSource p);
const char* outcome_name(TrialOutcome o);

Method method_from_name(const std::string& name);
PerceptionSource perception_from_name(const std::string& name);

/// Policy head architecture for a config. Training, evaluation, and the
/// benchmark all construct the network through this one function so
/// checkpoints stay loadable.
rl::ActorCriticConfig make_policy_config(const AppConfig& cfg);

/// Frozen networks for the learned method, shared across parallel trials.
struct PolicyAssets {
  std::shared_ptr<const std::vector<net::CheckpointEntry>> policy;
  std::shared_ptr<const std::vector<net::CheckpointEntry>> perception;

  bool complete() const { return policy && perception; }
};

/// Loads both checkpoints named in bench settings. Throws when a path is
/// empty or unreadable.
PolicyAssets load_policy_assets(const BenchSettings& bench);

/// One scripted crossing encounter: the target sweeps along a lateral line
/// at constant speed while a single obstacle either blocks the middle of the
/// line (speed 0) or drives across it. Geometry depends only on the rng
/// state, never on the method under test.
struct DynamicTrial {
  world::Scene scene;
  Vec3 sweep_start = Vec3::Zero();
  Vec3 sweep_end = Vec3::Zero();
  double waypoint_speed = 0.25;
  kin::VecX q0;
};

DynamicTrial make_dynamic_trial(const AppConfig& cfg, double obstacle_speed,
                                Rng& rng);

struct TrialRecord {
  TrialOutcome outcome = TrialOutcome::kTimeout;
  int steps = 0;
  double min_clearance = 0.0;  // worst ground-truth sphere clearance, m
  double final_error = 0.0;    // EE distance to the final waypoint, m
};

/// Runs one trial to termination. Collisions and tool violations are
/// adjudicated against the analytic scene, not the controller's own
/// perception, and end the trial immediately. `telemetry` may be null.
TrialRecord run_dynamic_trial(const AppConfig& cfg, Method method,
                              PerceptionSource perception,
                              const PolicyAssets* assets,
                              const DynamicTrial& trial, std::uint64_t seed,
                              CsvWriter* telemetry = nullptr);

/// Greedy-policy episode rollouts on a CmdpEnv with per-episode outcome
/// counting. Used by the ablation table and the acceptance gate.
struct EpisodeEvalStats {
  int episodes = 0;
  int successes = 0;
  int collisions = 0;
  int tool_violations = 0;
  double mean_reward = 0.0;  // per step

  double success_pct() const {
    return episodes > 0 ? 100.0 * successes / episodes : 0.0;
  }
};

EpisodeEvalStats evaluate_env_episodes(rl::Env& env, rl::ActorCritic& ac,
                                       int episodes, std::uint64_t seed);

}  // namespace reflex::bench

#endif  // REFLEX_BENCH_SESSION_HPP_
