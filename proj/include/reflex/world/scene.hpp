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

#ifndef REFLEX_WORLD_SCENE_HPP_
#define REFLEX_WORLD_SCENE_HPP_

#include <cstdint>
#include <vector>

#include "reflex/world/voxel_grid.hpp"

namespace reflex::world {

enum class Footprint { kBox, kCylinder };

/// Vertical extrusion from the floor: a yawed box or a cylinder footprint of
/// the given height, moving in the plane.
struct ObstacleSpec {
  Footprint footprint = Footprint::kBox;
  Eigen::Vector2d size = Eigen::Vector2d(0.1, 0.1);  // box: x/y extent; cylinder: (diameter, -)
  double height = 0.3;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // footprint center
  double yaw = 0.0;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // m/s, planar

  double radius() const { return 0.5 * size.x(); }  // cylinders only
};

struct Scene {
  Vec3 workspace_origin = Vec3(-0.3, -0.5, 0.0);
  Vec3 workspace_size = Vec3(0.6, 1.0, 0.6);
  double table_height = 0.05;  // slab below this z is solid; 0 disables
  bool walls = false;          // occupy cells outside the workspace footprint
  std::vector<ObstacleSpec> obstacles;
  std::uint64_t seed = 0;

  Vec3 workspace_max() const { return workspace_origin + workspace_size; }
};

/// True if a point is inside the obstacle volume. Box containment is
/// half-open ([min, max) in the footprint frame) so that rasterization counts
/// are exact for boundary-aligned geometry.
bool point_in_obstacle(const ObstacleSpec& obs, const Vec3& p);

/// Unsigned distance from a point to the obstacle surface (0 inside).
double obstacle_distance(const ObstacleSpec& obs, const Vec3& p);

/// Unsigned distance to the nearest scene solid (obstacles and table slab).
double scene_clearance(const Scene& scene, const Vec3& p);

/// Binary ground-truth occupancy: a voxel is occupied iff its center lies in
/// an obstacle, the table slab, or (when walls are on) outside the workspace.
VoxelGrid rasterize(const Scene& scene, double resolution,
                    const std::array<int, 3>& dims);

/// Rasterize on the scene's own workspace box.
VoxelGrid rasterize(const Scene& scene, double resolution);

/// Advance obstacle positions by velocity * dt; centers clamp at the
/// workspace border.
Scene step_obstacles(const Scene& scene, double dt);

}  // namespace reflex::world

#endif  // REFLEX_WORLD_SCENE_HPP_
