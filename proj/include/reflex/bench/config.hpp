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

#ifndef REFLEX_BENCH_CONFIG_HPP_
#define REFLEX_BENCH_CONFIG_HPP_

#include <string>
#include <vector>

#include "reflex/baselines/apf.hpp"
#include "reflex/baselines/mppi.hpp"
#include "reflex/rl/env.hpp"
#include "reflex/rl/p3o.hpp"

namespace reflex::bench {

/// Knobs specific to the benchmark harness rather than any one controller.
struct BenchSettings {
  int trials = 50;
  double waypoint_speed = 0.25;  // m/s of the swept target
  std::vector<double> obstacle_speeds = {0.0, 0.2, 0.4};
  double success_tolerance = 0.03;  // m to the final waypoint
  int max_steps = 500;

  std::vector<double> sweep_tool_sizes = {0.0, 0.1, 0.2};
  double sweep_hold_s = 3.0;
  double sweep_cell = 0.1;  // m, target grid pitch

  int profile_steps = 2000;
  int ablation_updates = 2000;
  int ablation_eval_episodes = 20;

  int n_workers = 1;           // parallel trials; results are order-stable
  bool save_telemetry = false;  // per-trial step traces (many files)

  std::string policy_checkpoint;      // learned-method assets; empty = unset
  std::string perception_checkpoint;

  void validate() const;
};

/// One self-contained experiment description: robot, world randomization,
/// sensor, learner and planner settings, benchmark knobs. Everything the CLI
/// does is a pure function of this struct plus a seed.
struct AppConfig {
  int version = 1;
  std::string chain_name = "planar3_desk";
  rl::CmdpEnvConfig env;
  rl::CmdpConfig rl;
  baselines::ApfConfig apf;
  baselines::MppiConfig mppi;
  BenchSettings bench;

  void validate() const;
};

/// Desk-scale preset: 3-DOF planar chain, 8x12x8 grid. Small enough that
/// training and every benchmark run in CI time.
AppConfig make_desk_config();

/// Full-scale preset: 6-DOF arm over a 12x20x12 grid. Used by the latency
/// profile and as the starting point for longer experiments.
AppConfig make_arm6_config();

/// JSON round trip. Parsing starts from the named chain preset and applies
/// overrides, so partial configs are valid; unknown keys are errors.
std::string config_to_json(const AppConfig& cfg);
AppConfig config_from_json(const std::string& text);

AppConfig load_config(const std::string& path);
void save_config(const std::string& path, const AppConfig& cfg);

}  // namespace reflex::bench

#endif  // REFLEX_BENCH_CONFIG_HPP_
