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

#ifndef REFLEX_WORLD_VOXEL_GRID_HPP_
#define REFLEX_WORLD_VOXEL_GRID_HPP_

#include <array>
#include <cstddef>
#include <vector>

#include "reflex/core/pose.hpp"

namespace reflex::world {

/// Axis-aligned voxel lattice. Cell values are occupancy probabilities,
/// distances in meters, or labels depending on the producer. Cell (i,j,k)
/// spans [origin + res*(i,j,k), origin + res*(i+1,j+1,k+1)) and is sampled at
/// its center.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double resolution = 0.05;
  std::array<int, 3> dims = {0, 0, 0};
  std::vector<double> cells;

  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin_, double resolution_, std::array<int, 3> dims_,
            double fill = 0.0);

  std::size_t size() const { return cells.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(dims[1]) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims[0]) +
           static_cast<std::size_t>(i);
  }

  double& at(int i, int j, int k) { return cells[index(i, j, k)]; }
  double at(int i, int j, int k) const { return cells[index(i, j, k)]; }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
  }

  Vec3 cell_center(int i, int j, int k) const {
    return origin + resolution * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }

  /// Cell containing a point (no bounds check; combine with in_bounds).
  std::array<int, 3> cell_of(const Vec3& p) const;

  /// Grid volume min/max corners.
  Vec3 min_corner() const { return origin; }
  Vec3 max_corner() const {
    return origin + resolution * Vec3(dims[0], dims[1], dims[2]);
  }

  bool contains(const Vec3& p) const;

  bool same_geometry(const VoxelGrid& other) const {
    return dims == other.dims && resolution == other.resolution &&
           (origin - other.origin).norm() < 1e-12;
  }
};

struct GridSample {
  double value = 0.0;
  bool out_of_bounds = false;
};

/// Trilinear interpolation over cell-center samples. Queries outside the grid
/// clamp to the border cells and set out_of_bounds.
GridSample grid_sample(const VoxelGrid& grid, const Vec3& point);

struct GridGradient {
  Vec3 direction = Vec3::Zero();  // unit vector of ascending value
  bool degenerate = false;        // gradient vanished before normalization
  bool out_of_bounds = false;
};

/// Analytic gradient of the trilinear interpolant, normalized. Matches finite
/// differences of grid_sample away from cell boundaries.
GridGradient grid_gradient(const VoxelGrid& grid, const Vec3& point);

}  // namespace reflex::world

#endif  // REFLEX_WORLD_VOXEL_GRID_HPP_
