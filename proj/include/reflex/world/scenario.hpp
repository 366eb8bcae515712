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

#ifndef REFLEX_WORLD_SCENARIO_HPP_
#define REFLEX_WORLD_SCENARIO_HPP_

#include <stdexcept>
#include <vector>

#include "reflex/core/rng.hpp"
#include "reflex/core/tool_region.hpp"
#include "reflex/world/scene.hpp"

namespace reflex::world {

/// Randomization ranges for episode generation. All intervals are inclusive.
struct ScenarioRanges {
  Vec3 workspace_origin = Vec3(-0.3, -0.5, 0.0);
  Vec3 workspace_size = Vec3(0.6, 1.0, 0.6);
  double resolution = 0.05;
  double table_height = 0.05;

  int min_obstacles = 1;
  int max_obstacles = 4;
  Eigen::Vector2d footprint_range = Eigen::Vector2d(0.05, 0.3);  // m
  Eigen::Vector2d height_range = Eigen::Vector2d(0.1, 0.6);      // m
  Eigen::Vector2d speed_range = Eigen::Vector2d(0.0, 0.0);       // m/s
  double cylinder_prob = 0.3;

  int n_waypoints = 2;
  double target_clearance = 0.1;  // required ESDF at sampled targets, m
  // Targets are drawn in this shell around the base (keeps them reachable).
  Eigen::Vector2d target_radius_range = Eigen::Vector2d(0.15, 0.38);
  double target_z = 0.22;        // fixed height for planar chains; <0: sample
  Eigen::Vector2d target_z_range = Eigen::Vector2d(0.15, 0.5);
  Vec3 base_position = Vec3::Zero();
  // Keep a spawn disk around the base clear so episodes never start in
  // contact.
  double base_clear_radius = 0.12;

  Vec3 tool_size_max = Vec3(0.25, 0.25, 0.25);
  Vec3 tool_offset_range = Vec3(0.1, 0.1, 0.1);  // +/- per axis
  double protective_prob = 0.5;

  int max_tries = 1000;
};

struct Scenario {
  Scene scene;
  std::vector<Pose> waypoints;
  ToolRegion tool;
  Mode mode = Mode::kEngage;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Draws a randomized scene, free-space target waypoints (ESDF above
/// ranges.target_clearance), a tool box, and an interaction mode.
/// Deterministic for a given rng state. Throws ScenarioError when rejection
/// sampling exceeds ranges.max_tries.
Scenario sample_scenario(Rng& rng, const ScenarioRanges& ranges);

}  // namespace reflex::world

#endif  // REFLEX_WORLD_SCENARIO_HPP_
