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

#ifndef REFLEX_PERCEPTION_CAMERA_HPP_
#define REFLEX_PERCEPTION_CAMERA_HPP_

#include <string>
#include <vector>

#include "reflex/core/pose.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/core/tool_region.hpp"
#include "reflex/kinematics/chain.hpp"
#include "reflex/world/scene.hpp"

namespace reflex::perception {

/// Depth is measured along the ray (Euclidean hit distance). Pixels without
/// a return carry kNoReturn.
inline constexpr float kNoReturn = -1.0f;

/// Pinhole-style raycast camera. Camera frame: +z optical axis, +x image
/// right, +y image down.
struct CameraModel {
  Pose pose;
  double fov_h = 1.2;  // radians
  double fov_v = 1.0;
  int width = 64;
  int height = 48;
  double max_range = 2.0;
  double noise_sigma = 0.005;  // meters, Gaussian on hit depth
  double dropout = 0.02;       // probability a hit pixel returns nothing

  void validate() const;

  /// Unit ray direction in world frame through pixel center (u, v).
  Vec3 pixel_ray(int u, int v) const;
};

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
};

/// First-hit distance of a world-frame ray against obstacles, the table
/// slab, the robot collision spheres, and the tool box. Returns a negative
/// value when nothing is hit within max_range.
double ray_first_hit(const Vec3& origin, const Vec3& dir, const world::Scene& scene,
                     const std::vector<kin::WorldSphere>& robot_spheres,
                     const ToolRegion& tool, const Pose& ee_pose, double max_range);

/// Renders the scene plus robot/tool geometry. When noise_rng is non-null,
/// Gaussian depth noise and pixel dropout are applied (row-major pixel
/// order, so results are reproducible for a given generator state).
DepthImage render_depth(const CameraModel& cam, const world::Scene& scene,
                        const std::vector<kin::WorldSphere>& robot_spheres,
                        const ToolRegion& tool, const Pose& ee_pose,
                        Rng* noise_rng = nullptr);

/// Back-projects hit pixels to world-frame points.
std::vector<Vec3> depth_to_cloud(const CameraModel& cam, const DepthImage& depth);

/// Debug dump as a binary portable graymap, no-return pixels black.
void save_pgm(const std::string& path, const DepthImage& depth, double max_range);

}  // namespace reflex::perception

#endif  // REFLEX_PERCEPTION_CAMERA_HPP_
