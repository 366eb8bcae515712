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

#ifndef REFLEX_BENCH_BENCH_HPP_
#define REFLEX_BENCH_BENCH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reflex/bench/session.hpp"

namespace reflex::bench {

// All run_* entry points write their result files under `out_dir` when it is
// non-empty and are deterministic functions of (config, seed): rerunning one
// must reproduce its files byte for byte at any worker count. The latency
// profile is the sole exception since it reports measured wall-clock times.

struct BenchmarkCell {
  Method method = Method::kApf;
  PerceptionSource perception = PerceptionSource::kGroundTruth;
  double obstacle_speed = 0.0;
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  int tool_violations = 0;
  int timeouts = 0;
  std::vector<TrialRecord> records;  // trial order

  double success_pct() const {
    return trials > 0 ? 100.0 * successes / trials : 0.0;
  }
  double collision_pct() const {
    return trials > 0 ? 100.0 * collisions / trials : 0.0;
  }
};

/// Every (method, perception) pair that makes sense without / with learned
/// assets. The learned row is appended only when `with_rl` is set.
std::vector<std::pair<Method, PerceptionSource>> default_benchmark_entries(
    bool with_rl);

/// Crossing-encounter table: for each entry and each obstacle speed, runs
/// bench.trials scripted trials and classifies each one exclusively as
/// success, collision, tool violation, or timeout. Trial geometry and sensor
/// noise depend only on (seed, speed, trial), so methods face identical
/// encounters.
std::vector<BenchmarkCell> run_dynamic_benchmark(
    const AppConfig& cfg,
    const std::vector<std::pair<Method, PerceptionSource>>& entries,
    const PolicyAssets* assets, std::uint64_t seed,
    const std::string& out_dir = "");

enum class SweepStatus { kOk, kInObstacle, kUnreachable };

struct SweepCell {
  double x = 0.0;
  double y = 0.0;
  SweepStatus status = SweepStatus::kOk;
  bool avoidance_active = false;  // reactive during the steady-state window
  double mean_error_mm = 0.0;     // converged tracking error
};

struct SweepResult {
  double tool_size = 0.0;
  std::vector<SweepCell> cells;  // x-major grid order
  int active_cells = 0;
  double high_error_area_m2 = 0.0;
  double free_mean_error_mm = 0.0;  // mean over ok cells with avoidance off
};

/// Static-scene tracking sweep: holds the hybrid controller on each target
/// of a lateral grid for bench.sweep_hold_s and reports converged error.
/// Switching uses analytic obstacle distances so the sweep isolates the
/// controller's shape from perception quality; the avoidance-active area
/// must grow with the commanded tool size.
std::vector<SweepResult> run_tracking_sweep(const AppConfig& cfg,
                                            std::uint64_t seed,
                                            const std::string& out_dir = "");

struct MemoryDemoResult {
  int tracked_cells = 0;        // obstacle surface cells seen before occlusion
  int occlusion_steps = 0;
  double occluded_min_prob = 0.0;      // min tracked prob while occluded
  double never_observed_max_dev = 0.0;  // max |p-0.5| where nothing was seen
  double post_removal_max_prob = 0.0;  // tracked prob after free re-observation
  std::vector<double> tracked_min_series;  // per-step min over tracked cells
};

/// Occlusion-retention walkthrough: observe a box, slide an occluder in
/// front of it for 100 steps, then remove both and watch the fused memory
/// carve the stale cells free again.
MemoryDemoResult run_memory_demo(const AppConfig& cfg,
                                 const std::string& out_dir = "");

struct StageStats {
  double mean_ms = 0.0;
  double sd_ms = 0.0;
  double max_ms = 0.0;
  double p50_ms = 0.0;
};

struct LatencyProfile {
  int steps = 0;
  StageStats voxelize;
  StageStats esdf;      // memory fusion + distance transform
  StageStats inference;
  StageStats control;   // observation pack, policy, hybrid step
  StageStats full_step; // one timer around all four stages
  StageStats mppi;      // separate planner loop
  int mppi_steps = 0;
  int mppi_samples = 0;
};

/// Single-threaded per-stage timing of the deployed pipeline plus a separate
/// MPPI planning loop. Wall-clock, so not byte-reproducible.
LatencyProfile profile_latency(const AppConfig& cfg, std::uint64_t seed);

void write_profile(const std::string& out_dir, const LatencyProfile& p);

struct AblationRow {
  std::string variant;
  int updates = 0;
  int eval_episodes = 0;
  int successes = 0;
  int collisions = 0;
  int tool_violations = 0;
  double success_pct = 0.0;
  double collision_pct = 0.0;
  double tool_violation_pct = 0.0;
  double mean_reward = 0.0;
  double pretrain_iou = -1.0;  // <0: variant has no pretraining stage
};

/// Canonical variant order for reports.
std::vector<std::string> ablation_variants();

/// Trains each perception variant from scratch with an equal update budget
/// and evaluates all of them on the same fixed episode seeds.
std::vector<AblationRow> run_ablation(const AppConfig& cfg,
                                      const std::vector<std::string>& variants,
                                      std::uint64_t seed,
                                      const std::string& out_dir = "");

}  // namespace reflex::bench

#endif  // REFLEX_BENCH_BENCH_HPP_
