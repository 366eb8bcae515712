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

#ifndef REFLEX_BASELINES_CLUSTER_HPP_
#define REFLEX_BASELINES_CLUSTER_HPP_

#include <vector>

#include <Eigen/Dense>

#include "reflex/core/pose.hpp"
#include "reflex/world/voxel_grid.hpp"

namespace reflex::baselines {

/// Axis-aligned box per obstacle cluster with a constant-velocity Kalman
/// filter on the centroid. Extents come from the latest matched component,
/// so partially occluded obstacles are underestimated by construction; that
/// is the failure mode this perception variant is meant to exhibit.
struct ObstacleTrack {
  int id = 0;
  Vec3 center = Vec3::Zero();    // filtered centroid
  Vec3 velocity = Vec3::Zero();
  Vec3 extents = Vec3::Zero();   // full AABB side lengths
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Identity();
  int age = 0;     // frames since creation
  int missed = 0;  // consecutive frames without a matched component
};

struct TrackerConfig {
  double occupied_threshold = 0.5;  // grid value counting as occupied
  double min_z = 0.0;               // ignore cells at or below (table mask)
  double match_distance = 0.15;     // m, centroid gate for association
  int max_missed = 5;               // coasting frames before a track drops
  double process_noise = 1.0;       // accel spectral density
  double measurement_noise = 0.01;  // m, centroid observation sd

  void validate() const;
};

/// One clustering + tracking update: 26-connected components of occupied
/// voxels above min_z, greedy nearest-centroid association against the
/// predicted tracks, Kalman update on matches, coasting otherwise.
/// Deterministic for fixed inputs; an empty grid coasts every track.
std::vector<ObstacleTrack> cluster_and_track(const world::VoxelGrid& occupancy,
                                             const std::vector<ObstacleTrack>& tracks,
                                             double dt,
                                             const TrackerConfig& cfg = {});

}  // namespace reflex::baselines

#endif  // REFLEX_BASELINES_CLUSTER_HPP_
