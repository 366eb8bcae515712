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

#include "reflex/world/voxel_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace reflex::world {

VoxelGrid::VoxelGrid(const Vec3& origin_, double resolution_,
                     std::array<int, 3> dims_, double fill)
    : origin(origin_), resolution(resolution_), dims(dims_) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid: resolution must be > 0");
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
    throw std::invalid_argument("grid: dims must be > 0");
  cells.assign(static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                   static_cast<std::size_t>(dims[2]),
               fill);
}

std::array<int, 3> VoxelGrid::cell_of(const Vec3& p) const {
  const Vec3 rel = (p - origin) / resolution;
  return {static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
          static_cast<int>(std::floor(rel.z()))};
}

bool VoxelGrid::contains(const Vec3& p) const {
  const Vec3 lo = min_corner();
  const Vec3 hi = max_corner();
  return p.x() >= lo.x() && p.x() < hi.x() && p.y() >= lo.y() && p.y() < hi.y() &&
         p.z() >= lo.z() && p.z() < hi.z();
}

namespace {

struct InterpAxis {
  int i0;
  int i1;
  double frac;  // weight of i1
};

InterpAxis interp_axis(double coord, int dim) {
  // coord in cell-center units: center of cell i sits at coord == i.
  double u = coord;
  if (u < 0.0) u = 0.0;
  if (u > dim - 1) u = static_cast<double>(dim - 1);
  int i0 = static_cast<int>(std::floor(u));
  if (i0 > dim - 2) i0 = dim - 2;
  if (i0 < 0) i0 = 0;
  if (dim == 1) return InterpAxis{0, 0, 0.0};
  return InterpAxis{i0, i0 + 1, u - i0};
}

}  // namespace

GridSample grid_sample(const VoxelGrid& grid, const Vec3& point) {
  GridSample out;
  out.out_of_bounds = !grid.contains(point);
  const Vec3 u = (point - grid.origin) / grid.resolution - Vec3(0.5, 0.5, 0.5);
  const InterpAxis ax = interp_axis(u.x(), grid.dims[0]);
  const InterpAxis ay = interp_axis(u.y(), grid.dims[1]);
  const InterpAxis az = interp_axis(u.z(), grid.dims[2]);
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const int k = dz ? az.i1 : az.i0;
    const double wz = dz ? az.frac : 1.0 - az.frac;
    for (int dy = 0; dy < 2; ++dy) {
      const int j = dy ? ay.i1 : ay.i0;
      const double wy = dy ? ay.frac : 1.0 - ay.frac;
      for (int dx = 0; dx < 2; ++dx) {
        const int i = dx ? ax.i1 : ax.i0;
        const double wx = dx ? ax.frac : 1.0 - ax.frac;
        acc += wx * wy * wz * grid.at(i, j, k);
      }
    }
  }
  out.value = acc;
  return out;
}

GridGradient grid_gradient(const VoxelGrid& grid, const Vec3& point) {
  GridGradient out;
  out.out_of_bounds = !grid.contains(point);
  const Vec3 u = (point - grid.origin) / grid.resolution - Vec3(0.5, 0.5, 0.5);
  const InterpAxis ax = interp_axis(u.x(), grid.dims[0]);
  const InterpAxis ay = interp_axis(u.y(), grid.dims[1]);
  const InterpAxis az = interp_axis(u.z(), grid.dims[2]);
  const double wx[2] = {1.0 - ax.frac, ax.frac};
  const double wy[2] = {1.0 - ay.frac, ay.frac};
  const double wz[2] = {1.0 - az.frac, az.frac};
  const double dx[2] = {-1.0, 1.0};
  Vec3 g = Vec3::Zero();
  for (int cz = 0; cz < 2; ++cz) {
    const int k = cz ? az.i1 : az.i0;
    for (int cy = 0; cy < 2; ++cy) {
      const int j = cy ? ay.i1 : ay.i0;
      for (int cx = 0; cx < 2; ++cx) {
        const int i = cx ? ax.i1 : ax.i0;
        const double v = grid.at(i, j, k);
        g.x() += dx[cx] * wy[cy] * wz[cz] * v;
        g.y() += wx[cx] * dx[cy] * wz[cz] * v;
        g.z() += wx[cx] * wy[cy] * dx[cz] * v;
      }
    }
  }
  g /= grid.resolution;
  // Collapsed axes (dim == 1) contribute a spurious +/- pair that cancels,
  // which is already zero; nothing extra needed.
  const double norm = g.norm();
  if (norm < 1e-9) {
    out.degenerate = true;
    out.direction = Vec3::Zero();
    return out;
  }
  out.direction = g / norm;
  return out;
}

}  // namespace reflex::world
