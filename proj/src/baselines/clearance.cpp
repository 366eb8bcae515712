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

#include "reflex/baselines/clearance.hpp"

#include <algorithm>

#include "reflex/baselines/cluster.hpp"

namespace reflex::baselines {

double clearance_from_gt(const Vec3& point, const world::Scene& scene) {
  return world::scene_clearance(scene, point);
}

double clearance_from_esdf(const Vec3& point, const world::VoxelGrid& esdf) {
  const world::GridSample s = world::grid_sample(esdf, point);
  return s.out_of_bounds ? kFarClearance : s.value;
}

double clearance_from_tracks(const Vec3& point,
                             const std::vector<ObstacleTrack>& tracks) {
  double best = kFarClearance;
  for (const ObstacleTrack& t : tracks) {
    const Vec3 d = (point - t.center).cwiseAbs() - 0.5 * t.extents;
    best = std::min(best, d.cwiseMax(0.0).norm());
  }
  return best;
}

Vec3 clearance_gradient(const ClearanceFn& fn, const Vec3& point, double h) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 hi = point, lo = point;
    hi[a] += h;
    lo[a] -= h;
    g[a] = (fn(hi) - fn(lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace reflex::baselines
