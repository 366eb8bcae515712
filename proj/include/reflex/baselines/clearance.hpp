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

#ifndef REFLEX_BASELINES_CLEARANCE_HPP_
#define REFLEX_BASELINES_CLEARANCE_HPP_

#include <functional>
#include <vector>

#include "reflex/core/pose.hpp"
#include "reflex/world/scene.hpp"
#include "reflex/world/voxel_grid.hpp"

namespace reflex::baselines {

/// Point clearance query in meters; the common currency between the
/// perception variants and the reactive planners.
using ClearanceFn = std::function<double(const Vec3&)>;

/// Clearance reported for queries outside any grid or track extent. Finite so
/// numeric gradients stay usable, far enough to never trigger avoidance.
inline constexpr double kFarClearance = 10.0;

struct ObstacleTrack;  // defined in cluster.hpp

/// Analytic scene distance (obstacles + table slab).
double clearance_from_gt(const Vec3& point, const world::Scene& scene);

/// Trilinear ESDF lookup; out-of-grid queries return kFarClearance.
double clearance_from_esdf(const Vec3& point, const world::VoxelGrid& esdf);

/// Distance to the nearest tracked AABB (0 inside a box).
double clearance_from_tracks(const Vec3& point,
                             const std::vector<ObstacleTrack>& tracks);

/// Central-difference gradient of an arbitrary clearance source.
Vec3 clearance_gradient(const ClearanceFn& fn, const Vec3& point, double h = 1e-3);

}  // namespace reflex::baselines

#endif  // REFLEX_BASELINES_CLEARANCE_HPP_
