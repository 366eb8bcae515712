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

#include "reflex/world/scenario.hpp"

#include <cmath>

#include "reflex/world/esdf.hpp"

namespace reflex::world {

Scenario sample_scenario(Rng& rng, const ScenarioRanges& ranges) {
  Scenario out;
  out.scene.workspace_origin = ranges.workspace_origin;
  out.scene.workspace_size = ranges.workspace_size;
  out.scene.table_height = ranges.table_height;

  const Vec3 lo = ranges.workspace_origin;
  const Vec3 hi = ranges.workspace_origin + ranges.workspace_size;

  const int span = ranges.max_obstacles - ranges.min_obstacles;
  const int n_obs =
      ranges.min_obstacles +
      (span > 0 ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span) + 1))
                : 0);
  int tries = 0;
  while (static_cast<int>(out.scene.obstacles.size()) < n_obs) {
    if (++tries > ranges.max_tries)
      throw ScenarioError("scenario: obstacle rejection sampling exhausted");
    ObstacleSpec obs;
    obs.footprint =
        rng.bernoulli(ranges.cylinder_prob) ? Footprint::kCylinder : Footprint::kBox;
    const double sx = rng.uniform(ranges.footprint_range.x(), ranges.footprint_range.y());
    const double sy = obs.footprint == Footprint::kCylinder
                          ? sx
                          : rng.uniform(ranges.footprint_range.x(), ranges.footprint_range.y());
    obs.size = Eigen::Vector2d(sx, sy);
    obs.height = rng.uniform(ranges.height_range.x(), ranges.height_range.y());
    obs.yaw = rng.uniform(0.0, 2.0 * M_PI);
    obs.position.x() = rng.uniform(lo.x(), hi.x());
    obs.position.y() = rng.uniform(lo.y(), hi.y());
    const double speed = rng.uniform(ranges.speed_range.x(), ranges.speed_range.y());
    if (speed > 0.0) {
      const double heading = rng.uniform(0.0, 2.0 * M_PI);
      obs.velocity = speed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
    }
    // Keep the robot's spawn disk clear.
    const Vec3 probe(ranges.base_position.x(), ranges.base_position.y(),
                     std::min(obs.height * 0.5, ranges.base_position.z()));
    if (obstacle_distance(obs, probe) < ranges.base_clear_radius) continue;
    out.scene.obstacles.push_back(obs);
  }

  const VoxelGrid occ = rasterize(out.scene, ranges.resolution);
  const VoxelGrid esdf = compute_esdf(occ);

  tries = 0;
  while (static_cast<int>(out.waypoints.size()) < ranges.n_waypoints) {
    if (++tries > ranges.max_tries)
      throw ScenarioError("scenario: waypoint rejection sampling exhausted");
    const double radius =
        rng.uniform(ranges.target_radius_range.x(), ranges.target_radius_range.y());
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    Pose target;
    target.position =
        ranges.base_position + radius * Vec3(std::cos(angle), std::sin(angle), 0.0);
    target.position.z() = ranges.target_z >= 0.0
                              ? ranges.target_z
                              : rng.uniform(ranges.target_z_range.x(),
                                            ranges.target_z_range.y());
    target.orientation = quat_from_yaw(rng.uniform(-M_PI, M_PI));
    if (target.position.x() < lo.x() || target.position.x() >= hi.x() ||
        target.position.y() < lo.y() || target.position.y() >= hi.y() ||
        target.position.z() < lo.z() || target.position.z() >= hi.z())
      continue;
    const GridSample s = grid_sample(esdf, target.position);
    if (s.out_of_bounds || s.value <= ranges.target_clearance) continue;
    out.waypoints.push_back(target);
  }

  out.tool.size = Vec3(rng.uniform(0.0, ranges.tool_size_max.x()),
                       rng.uniform(0.0, ranges.tool_size_max.y()),
                       rng.uniform(0.0, ranges.tool_size_max.z()));
  out.tool.offset =
      Vec3(rng.uniform(-ranges.tool_offset_range.x(), ranges.tool_offset_range.x()),
           rng.uniform(-ranges.tool_offset_range.y(), ranges.tool_offset_range.y()),
           rng.uniform(-ranges.tool_offset_range.z(), ranges.tool_offset_range.z()));
  out.mode = rng.bernoulli(ranges.protective_prob) ? Mode::kProtective : Mode::kEngage;
  return out;
}

}  // namespace reflex::world
