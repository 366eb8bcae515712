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

#include "reflex/world/esdf.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace reflex::world {

namespace {

constexpr double kInf = 1e20;

// 1D squared-distance transform (lower envelope of parabolas).
// f and d have length n; scratch v/z sized n and n+1.
void dt_1d(const double* f, double* d, int n, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * (double)q) - (f[v[k]] + v[k] * (double)v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * (double)q) - (f[v[k]] + v[k] * (double)v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - (double)v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

double grid_diagonal(const VoxelGrid& grid) {
  return grid.resolution *
         Vec3(grid.dims[0], grid.dims[1], grid.dims[2]).norm();
}

VoxelGrid compute_esdf(const VoxelGrid& occupancy, double max_distance) {
  const double clamp = max_distance < 0.0 ? grid_diagonal(occupancy) : max_distance;
  const int nx = occupancy.dims[0];
  const int ny = occupancy.dims[1];
  const int nz = occupancy.dims[2];
  VoxelGrid sq(occupancy.origin, occupancy.resolution, occupancy.dims, 0.0);

  for (std::size_t i = 0; i < occupancy.cells.size(); ++i)
    sq.cells[i] = occupancy.cells[i] >= 0.5 ? 0.0 : kInf;

  const int nmax = std::max(nx, std::max(ny, nz));
  std::vector<double> f(static_cast<std::size_t>(nmax));
  std::vector<double> d(static_cast<std::size_t>(nmax));
  std::vector<int> v(static_cast<std::size_t>(nmax));
  std::vector<double> z(static_cast<std::size_t>(nmax) + 1);

  // x pass
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) f[static_cast<std::size_t>(i)] = sq.at(i, j, k);
      dt_1d(f.data(), d.data(), nx, v.data(), z.data());
      for (int i = 0; i < nx; ++i) sq.at(i, j, k) = d[static_cast<std::size_t>(i)];
    }
  // y pass
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) f[static_cast<std::size_t>(j)] = sq.at(i, j, k);
      dt_1d(f.data(), d.data(), ny, v.data(), z.data());
      for (int j = 0; j < ny; ++j) sq.at(i, j, k) = d[static_cast<std::size_t>(j)];
    }
  // z pass
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < nz; ++k) f[static_cast<std::size_t>(k)] = sq.at(i, j, k);
      dt_1d(f.data(), d.data(), nz, v.data(), z.data());
      for (int k = 0; k < nz; ++k) sq.at(i, j, k) = d[static_cast<std::size_t>(k)];
    }

  VoxelGrid out(occupancy.origin, occupancy.resolution, occupancy.dims, 0.0);
  for (std::size_t i = 0; i < sq.cells.size(); ++i) {
    const double dist = sq.cells[i] >= kInf
                            ? clamp
                            : occupancy.resolution * std::sqrt(sq.cells[i]);
    out.cells[i] = std::min(dist, clamp);
  }
  return out;
}

}  // namespace reflex::world
