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

#ifndef REFLEX_PERCEPTION_OBSERVATION_HPP_
#define REFLEX_PERCEPTION_OBSERVATION_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "reflex/core/pose.hpp"
#include "reflex/core/tool_region.hpp"
#include "reflex/kinematics/chain.hpp"
#include "reflex/world/scene.hpp"
#include "reflex/world/voxel_grid.hpp"

namespace reflex::perception {

enum class VoxelLabel : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

/// Per-frame sensor evidence: exclusive labels plus the matching occupancy
/// channel (occupied 1.0, free 0.0, unknown 0.5).
struct ObservationGrid {
  world::VoxelGrid occupancy;
  std::vector<VoxelLabel> labels;

  VoxelLabel label(int i, int j, int k) const {
    return labels[occupancy.index(i, j, k)];
  }
};

ObservationGrid make_unknown_grid(const Vec3& origin, double resolution,
                                  const std::array<int, 3>& dims);

/// Labels voxels from a point cloud with ray carving: voxels holding a point
/// become occupied, voxels a ray traverses strictly before its hit become
/// free, everything else stays unknown. Occupied evidence wins over free.
/// Rays without a return (absent from the cloud) carve nothing.
ObservationGrid voxelize_observation(const std::vector<Vec3>& cloud,
                                     const Vec3& camera_origin, const Vec3& grid_origin,
                                     double resolution, const std::array<int, 3>& dims);

struct FusionParams {
  double p_occupied = 0.9;  // per-frame evidence strength
  double p_free = 0.2;
  double clamp_lo = 0.01;
  double clamp_hi = 0.99;
};

/// Log-odds update of a probability grid by one observation. Unknown cells
/// pass through unchanged; outputs clamp to [clamp_lo, clamp_hi].
world::VoxelGrid fuse_memory(const world::VoxelGrid& prev, const ObservationGrid& obs,
                             const FusionParams& params = {});

inline constexpr double kSelfFilterMargin = 0.03;

/// Forces voxels near the robot spheres or inside the (inflated) tool box to
/// unknown. Used by the mapping-style baseline only; over-filtering near the
/// gripper is its documented failure mode.
ObservationGrid filter_self(const ObservationGrid& grid,
                            const std::vector<kin::WorldSphere>& robot_spheres,
                            const ToolRegion& tool, const Pose& ee_pose,
                            double margin = kSelfFilterMargin);

/// Ground-truth collidable-region labels: 1 where the analytic scene
/// clearance at the voxel center falls below half the grid resolution.
world::VoxelGrid make_training_labels(const world::Scene& scene, double resolution,
                                      const std::array<int, 3>& dims);

/// Flattens (occupancy, unknown-mask, extra) into the [C, D, H, W] channel
/// layout expected by conv inputs, with grid axis i -> D, j -> H, k -> W.
std::vector<float> pack_grid_channels(const ObservationGrid& obs,
                                      const world::VoxelGrid& extra);

}  // namespace reflex::perception

#endif  // REFLEX_PERCEPTION_OBSERVATION_HPP_
