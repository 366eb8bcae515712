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

#include "reflex/baselines/cluster.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace reflex::baselines {

void TrackerConfig::validate() const {
  if (match_distance <= 0.0)
    throw std::invalid_argument("tracker: match distance must be positive");
  if (max_missed < 0) throw std::invalid_argument("tracker: max_missed must be >= 0");
  if (process_noise <= 0.0 || measurement_noise <= 0.0)
    throw std::invalid_argument("tracker: noise terms must be positive");
}

namespace {

struct Component {
  Vec3 centroid = Vec3::Zero();
  Vec3 extents = Vec3::Zero();
};

std::vector<Component> find_components(const world::VoxelGrid& grid,
                                       const TrackerConfig& cfg) {
  const auto& d = grid.dims;
  std::vector<std::uint8_t> occupied(grid.size(), 0);
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i)
        if (grid.at(i, j, k) > cfg.occupied_threshold &&
            grid.cell_center(i, j, k).z() > cfg.min_z)
          occupied[grid.index(i, j, k)] = 1;

  std::vector<Component> comps;
  std::vector<std::array<int, 3>> stack;
  // Seeds scan in index order, so component order is deterministic.
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        if (!occupied[grid.index(i, j, k)]) continue;
        occupied[grid.index(i, j, k)] = 0;
        stack.assign(1, {i, j, k});
        Vec3 sum = Vec3::Zero();
        Vec3 lo = grid.cell_center(i, j, k), hi = lo;
        int count = 0;
        while (!stack.empty()) {
          const auto [ci, cj, ck] = stack.back();
          stack.pop_back();
          const Vec3 c = grid.cell_center(ci, cj, ck);
          sum += c;
          lo = lo.cwiseMin(c);
          hi = hi.cwiseMax(c);
          ++count;
          for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
              for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0 && dk == 0) continue;
                const int ni = ci + di, nj = cj + dj, nk = ck + dk;
                if (!grid.in_bounds(ni, nj, nk)) continue;
                if (!occupied[grid.index(ni, nj, nk)]) continue;
                occupied[grid.index(ni, nj, nk)] = 0;
                stack.push_back({ni, nj, nk});
              }
        }
        Component comp;
        comp.centroid = sum / count;
        comp.extents = (hi - lo) + Vec3::Constant(grid.resolution);
        comps.push_back(comp);
      }
    }
  }
  return comps;
}

using Mat6 = Eigen::Matrix<double, 6, 6>;

Mat6 transition(double dt) {
  Mat6 f = Mat6::Identity();
  f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
  return f;
}

Mat6 process_noise(double dt, double q) {
  Mat6 noise = Mat6::Zero();
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  noise.block<3, 3>(0, 0) = q * (dt * dt * dt / 3.0) * eye;
  noise.block<3, 3>(0, 3) = q * (dt * dt / 2.0) * eye;
  noise.block<3, 3>(3, 0) = q * (dt * dt / 2.0) * eye;
  noise.block<3, 3>(3, 3) = q * dt * eye;
  return noise;
}

}  // namespace

std::vector<ObstacleTrack> cluster_and_track(const world::VoxelGrid& occupancy,
                                             const std::vector<ObstacleTrack>& tracks,
                                             double dt, const TrackerConfig& cfg) {
  cfg.validate();
  if (dt <= 0.0) throw std::invalid_argument("tracker: dt must be positive");

  const std::vector<Component> comps = find_components(occupancy, cfg);

  // Constant-velocity predict for every existing track.
  std::vector<ObstacleTrack> predicted = tracks;
  const Mat6 f = transition(dt);
  const Mat6 qn = process_noise(dt, cfg.process_noise);
  for (ObstacleTrack& t : predicted) {
    t.center += dt * t.velocity;
    t.covariance = f * t.covariance * f.transpose() + qn;
    ++t.age;
  }

  // Greedy nearest association in component order.
  std::vector<int> match(comps.size(), -1);
  std::vector<std::uint8_t> taken(predicted.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double best = cfg.match_distance;
    int best_t = -1;
    for (std::size_t t = 0; t < predicted.size(); ++t) {
      if (taken[t]) continue;
      const double dist = (predicted[t].center - comps[c].centroid).norm();
      if (dist < best) {
        best = dist;
        best_t = static_cast<int>(t);
      }
    }
    if (best_t >= 0) {
      match[c] = best_t;
      taken[static_cast<std::size_t>(best_t)] = 1;
    }
  }

  const double r = cfg.measurement_noise * cfg.measurement_noise;
  std::vector<ObstacleTrack> out;
  out.reserve(predicted.size() + comps.size());

  int next_id = 0;
  for (const ObstacleTrack& t : tracks) next_id = std::max(next_id, t.id + 1);

  for (std::size_t t = 0; t < predicted.size(); ++t) {
    ObstacleTrack track = predicted[t];
    const auto it = std::find(match.begin(), match.end(), static_cast<int>(t));
    if (it != match.end()) {
      const Component& comp = comps[static_cast<std::size_t>(it - match.begin())];
      // Position-only measurement: H = [I 0].
      const Eigen::Matrix3d s =
          track.covariance.block<3, 3>(0, 0) + r * Eigen::Matrix3d::Identity();
      const Eigen::Matrix<double, 6, 3> gain =
          track.covariance.block<6, 3>(0, 0) * s.inverse();
      const Vec3 innovation = comp.centroid - track.center;
      track.center += gain.block<3, 3>(0, 0) * innovation;
      track.velocity += gain.block<3, 3>(3, 0) * innovation;
      Mat6 identity_kh = Mat6::Identity();
      identity_kh.block<6, 3>(0, 0) -= gain;
      track.covariance = identity_kh * track.covariance;
      track.extents = comp.extents;
      track.missed = 0;
      out.push_back(track);
    } else {
      ++track.missed;
      if (track.missed <= cfg.max_missed) out.push_back(track);  // coast
    }
  }

  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (match[c] >= 0) continue;
    ObstacleTrack track;
    track.id = next_id++;
    track.center = comps[c].centroid;
    track.velocity = Vec3::Zero();
    track.extents = comps[c].extents;
    track.covariance = Mat6::Zero();
    track.covariance.block<3, 3>(0, 0) = r * Eigen::Matrix3d::Identity();
    track.covariance.block<3, 3>(3, 3) = Eigen::Matrix3d::Identity();
    out.push_back(track);
  }
  return out;
}

}  // namespace reflex::baselines
