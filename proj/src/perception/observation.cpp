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

#include "reflex/perception/observation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace reflex::perception {
namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double l) { return 1.0 / (1.0 + std::exp(-l)); }

/// Amanatides-Woo grid walk from the camera toward one hit point, labeling
/// traversed cells free until the cell containing the hit.
void carve_ray(const Vec3& origin, const Vec3& hit, ObservationGrid& grid) {
  world::VoxelGrid& g = grid.occupancy;
  const Vec3 span = hit - origin;
  const double len = span.norm();
  if (len < 1e-12) return;
  const Vec3 dir = span / len;

  const Vec3 gmin = g.min_corner();
  const Vec3 gmax = g.max_corner();
  double t0 = 0.0, t1 = len;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-300) {
      if (origin[a] < gmin[a] || origin[a] >= gmax[a]) return;
      continue;
    }
    double ta = (gmin[a] - origin[a]) / dir[a];
    double tb = (gmax[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  }
  if (t1 <= t0) return;

  const Vec3 entry = origin + (t0 + 1e-9) * dir;
  std::array<int, 3> c = g.cell_of(entry);
  for (int a = 0; a < 3; ++a) c[a] = std::clamp(c[a], 0, g.dims[a] - 1);
  const std::array<int, 3> hit_cell = g.cell_of(hit);
  const bool hit_in_grid = g.in_bounds(hit_cell[0], hit_cell[1], hit_cell[2]);

  Vec3 tmax, tdelta;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 1e-300) {
      tmax[a] = (gmin[a] + (c[a] + 1) * g.resolution - origin[a]) / dir[a];
      tdelta[a] = g.resolution / dir[a];
    } else if (dir[a] < -1e-300) {
      tmax[a] = (gmin[a] + c[a] * g.resolution - origin[a]) / dir[a];
      tdelta[a] = -g.resolution / dir[a];
    } else {
      tmax[a] = std::numeric_limits<double>::infinity();
      tdelta[a] = std::numeric_limits<double>::infinity();
    }
  }

  double t = t0;
  const double t_end = std::min(t1, len);
  while (t < t_end - 1e-12) {
    if (hit_in_grid && c == hit_cell) break;
    const std::size_t idx = g.index(c[0], c[1], c[2]);
    grid.labels[idx] = VoxelLabel::kFree;
    int a = 0;
    if (tmax[1] < tmax[a]) a = 1;
    if (tmax[2] < tmax[a]) a = 2;
    t = tmax[a];
    tmax[a] += tdelta[a];
    c[a] += dir[a] > 0.0 ? 1 : -1;
    if (c[a] < 0 || c[a] >= g.dims[a]) break;
  }
}

}  // namespace

ObservationGrid make_unknown_grid(const Vec3& origin, double resolution,
                                  const std::array<int, 3>& dims) {
  ObservationGrid out;
  out.occupancy = world::VoxelGrid(origin, resolution, dims);
  out.occupancy.cells.assign(out.occupancy.cells.size(), 0.5);
  out.labels.assign(out.occupancy.cells.size(), VoxelLabel::kUnknown);
  return out;
}

ObservationGrid voxelize_observation(const std::vector<Vec3>& cloud,
                                     const Vec3& camera_origin, const Vec3& grid_origin,
                                     double resolution, const std::array<int, 3>& dims) {
  ObservationGrid out = make_unknown_grid(grid_origin, resolution, dims);
  for (const Vec3& p : cloud) carve_ray(camera_origin, p, out);
  // Points stamp occupancy last so occupied evidence beats carving.
  for (const Vec3& p : cloud) {
    const auto c = out.occupancy.cell_of(p);
    if (!out.occupancy.in_bounds(c[0], c[1], c[2])) continue;
    out.labels[out.occupancy.index(c[0], c[1], c[2])] = VoxelLabel::kOccupied;
  }
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (out.labels[i] == VoxelLabel::kOccupied)
      out.occupancy.cells[i] = 1.0;
    else if (out.labels[i] == VoxelLabel::kFree)
      out.occupancy.cells[i] = 0.0;
  }
  return out;
}

world::VoxelGrid fuse_memory(const world::VoxelGrid& prev, const ObservationGrid& obs,
                             const FusionParams& params) {
  if (!prev.same_geometry(obs.occupancy))
    throw std::invalid_argument("fuse_memory: grid geometry mismatch");
  const double l_occ = logit(params.p_occupied);
  const double l_free = logit(params.p_free);
  world::VoxelGrid out = prev;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const VoxelLabel label = obs.labels[i];
    if (label == VoxelLabel::kUnknown) continue;
    double l = logit(std::clamp(prev.cells[i], params.clamp_lo, params.clamp_hi));
    l += label == VoxelLabel::kOccupied ? l_occ : l_free;
    out.cells[i] = std::clamp(expit(l), params.clamp_lo, params.clamp_hi);
  }
  return out;
}

ObservationGrid filter_self(const ObservationGrid& grid,
                            const std::vector<kin::WorldSphere>& robot_spheres,
                            const ToolRegion& tool, const Pose& ee_pose,
                            double margin) {
  ObservationGrid out = grid;
  const world::VoxelGrid& g = grid.occupancy;
  const Quat ee_inv = ee_pose.orientation.conjugate();
  const Vec3 half = 0.5 * tool.size + Vec3::Constant(margin);
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const Vec3 c = g.cell_center(i, j, k);
        bool self = false;
        for (const auto& s : robot_spheres) {
          if ((c - s.center).norm() <= s.radius + margin) {
            self = true;
            break;
          }
        }
        if (!self && !tool.empty()) {
          const Vec3 local = ee_inv * (c - ee_pose.position) - tool.offset;
          self = std::abs(local.x()) <= half.x() && std::abs(local.y()) <= half.y() &&
                 std::abs(local.z()) <= half.z();
        }
        if (self) {
          const std::size_t idx = g.index(i, j, k);
          out.labels[idx] = VoxelLabel::kUnknown;
          out.occupancy.cells[idx] = 0.5;
        }
      }
  return out;
}

std::vector<float> pack_grid_channels(const ObservationGrid& obs,
                                      const world::VoxelGrid& extra) {
  const world::VoxelGrid& g = obs.occupancy;
  if (!extra.same_geometry(g))
    throw std::invalid_argument("pack_grid_channels: geometry mismatch");
  const std::size_t n = g.size();
  std::vector<float> out(3 * n);
  for (int i = 0; i < g.dims[0]; ++i)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int k = 0; k < g.dims[2]; ++k) {
        const std::size_t src = g.index(i, j, k);
        const std::size_t dst =
            (static_cast<std::size_t>(i) * g.dims[1] + j) * g.dims[2] + k;
        out[dst] = static_cast<float>(g.cells[src]);
        out[dst + n] = obs.labels[src] == VoxelLabel::kUnknown ? 1.0f : 0.0f;
        out[dst + 2 * n] = static_cast<float>(extra.cells[src]);
      }
  return out;
}

world::VoxelGrid make_training_labels(const world::Scene& scene, double resolution,
                                      const std::array<int, 3>& dims) {
  world::VoxelGrid out(scene.workspace_origin, resolution, dims);
  const double threshold = 0.5 * resolution;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i)
        out.at(i, j, k) =
            world::scene_clearance(scene, out.cell_center(i, j, k)) < threshold ? 1.0
                                                                                : 0.0;
  return out;
}

}  // namespace reflex::perception
