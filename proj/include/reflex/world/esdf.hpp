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

#ifndef REFLEX_WORLD_ESDF_HPP_
#define REFLEX_WORLD_ESDF_HPP_

#include "reflex/world/voxel_grid.hpp"

namespace reflex::world {

/// Exact Euclidean distance transform of a binary occupancy grid (cells
/// >= 0.5 count as occupied). Each output cell holds the metric distance from
/// its center to the nearest occupied cell center; occupied cells hold 0.
/// With no occupied cells every cell holds max_distance. Distances are
/// clamped to max_distance (< 0 means the grid diagonal).
///
/// Separable lower-envelope algorithm, linear per axis; squared distances
/// stay exact integers in cell units until the final square root, so results
/// match a brute-force nearest-occupied scan bit for bit.
VoxelGrid compute_esdf(const VoxelGrid& occupancy, double max_distance = -1.0);

/// Default clamp used when max_distance < 0.
double grid_diagonal(const VoxelGrid& grid);

}  // namespace reflex::world

#endif  // REFLEX_WORLD_ESDF_HPP_
