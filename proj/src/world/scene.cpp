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

#include "reflex/world/scene.hpp"

#include <algorithm>
#include <cmath>

namespace reflex::world {

namespace {

Eigen::Vector2d to_footprint_frame(const ObstacleSpec& obs, const Vec3& p) {
  const Eigen::Vector2d rel(p.x() - obs.position.x(), p.y() - obs.position.y());
  const double c = std::cos(obs.yaw);
  const double s = std::sin(obs.yaw);
  return Eigen::Vector2d(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y());
}

}  // namespace

bool point_in_obstacle(const ObstacleSpec& obs, const Vec3& p) {
  if (p.z() < 0.0 || p.z() >= obs.height) return false;
  const Eigen::Vector2d local = to_footprint_frame(obs, p);
  if (obs.footprint == Footprint::kBox) {
    const Eigen::Vector2d half = 0.5 * obs.size;
    return local.x() >= -half.x() && local.x() < half.x() && local.y() >= -half.y() &&
           local.y() < half.y();
  }
  return local.squaredNorm() < obs.radius() * obs.radius();
}

double obstacle_distance(const ObstacleSpec& obs, const Vec3& p) {
  const Eigen::Vector2d local = to_footprint_frame(obs, p);
  double planar;
  if (obs.footprint == Footprint::kBox) {
    const Eigen::Vector2d half = 0.5 * obs.size;
    const Eigen::Vector2d d(std::abs(local.x()) - half.x(), std::abs(local.y()) - half.y());
    const Eigen::Vector2d outside = d.cwiseMax(0.0);
    planar = outside.norm() + std::min(0.0, std::max(d.x(), d.y()));
  } else {
    planar = local.norm() - obs.radius();
  }
  // Vertical excess relative to the [0, height] extrusion.
  double dz = 0.0;
  if (p.z() > obs.height) {
    dz = p.z() - obs.height;
  } else if (p.z() < 0.0) {
    dz = -p.z();
  }
  const double planar_out = std::max(planar, 0.0);
  const double dist = std::sqrt(planar_out * planar_out + dz * dz);
  if (dist > 0.0) return dist;
  return 0.0;  // inside
}

double scene_clearance(const Scene& scene, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& obs : scene.obstacles) best = std::min(best, obstacle_distance(obs, p));
  if (scene.table_height > 0.0) best = std::min(best, std::max(p.z() - scene.table_height, 0.0));
  return best;
}

VoxelGrid rasterize(const Scene& scene, double resolution,
                    const std::array<int, 3>& dims) {
  VoxelGrid grid(scene.workspace_origin, resolution, dims, 0.0);
  const Vec3 ws_lo = scene.workspace_origin;
  const Vec3 ws_hi = scene.workspace_max();
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 c = grid.cell_center(i, j, k);
        bool occupied = false;
        if (scene.table_height > 0.0 && c.z() < scene.table_height) occupied = true;
        if (!occupied && scene.walls) {
          occupied = c.x() < ws_lo.x() || c.x() >= ws_hi.x() || c.y() < ws_lo.y() ||
                     c.y() >= ws_hi.y() || c.z() < ws_lo.z() || c.z() >= ws_hi.z();
        }
        if (!occupied) {
          for (const auto& obs : scene.obstacles) {
            if (point_in_obstacle(obs, c)) {
              occupied = true;
              break;
            }
          }
        }
        if (occupied) grid.at(i, j, k) = 1.0;
      }
    }
  }
  return grid;
}

VoxelGrid rasterize(const Scene& scene, double resolution) {
  const std::array<int, 3> dims = {
      static_cast<int>(std::lround(scene.workspace_size.x() / resolution)),
      static_cast<int>(std::lround(scene.workspace_size.y() / resolution)),
      static_cast<int>(std::lround(scene.workspace_size.z() / resolution))};
  return rasterize(scene, resolution, dims);
}

Scene step_obstacles(const Scene& scene, double dt) {
  Scene out = scene;
  const Vec3 lo = scene.workspace_origin;
  const Vec3 hi = scene.workspace_max();
  for (auto& obs : out.obstacles) {
    obs.position += obs.velocity * dt;
    obs.position.x() = std::clamp(obs.position.x(), lo.x(), hi.x());
    obs.position.y() = std::clamp(obs.position.y(), lo.y(), hi.y());
  }
  return out;
}

}  // namespace reflex::world
