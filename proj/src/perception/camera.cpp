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

#include "reflex/perception/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace reflex::perception {
namespace {

constexpr double kMiss = -1.0;

/// Entry distance of a ray into [lo, hi], or kMiss. A ray starting inside
/// reports distance 0.
double ray_aabb(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-300) {
      if (o[a] < lo[a] || o[a] > hi[a]) return kMiss;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kMiss;
  }
  return t0;
}

double ray_obstacle(const Vec3& o, const Vec3& d, const world::ObstacleSpec& obs) {
  if (obs.footprint == world::Footprint::kBox) {
    // Rotate into the footprint frame (yaw about the footprint center).
    const double c = std::cos(-obs.yaw), s = std::sin(-obs.yaw);
    const Vec3 rel(o.x() - obs.position.x(), o.y() - obs.position.y(), o.z());
    const Vec3 ol(c * rel.x() - s * rel.y(), s * rel.x() + c * rel.y(), rel.z());
    const Vec3 dl(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z());
    const Vec3 lo(-0.5 * obs.size.x(), -0.5 * obs.size.y(), 0.0);
    const Vec3 hi(0.5 * obs.size.x(), 0.5 * obs.size.y(), obs.height);
    return ray_aabb(ol, dl, lo, hi);
  }
  // Finite vertical cylinder: lateral surface plus end caps.
  const double r = obs.radius();
  const double ox = o.x() - obs.position.x();
  const double oy = o.y() - obs.position.y();
  double best = std::numeric_limits<double>::infinity();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-300) {
    const double b = 2.0 * (ox * d.x() + oy * d.y());
    const double cq = ox * ox + oy * oy - r * r;
    const double disc = b * b - 4.0 * a * cq;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t < 0.0) continue;
        const double z = o.z() + t * d.z();
        if (z >= 0.0 && z <= obs.height) best = std::min(best, t);
      }
    }
  }
  if (std::abs(d.z()) > 1e-300) {
    for (double zc : {0.0, obs.height}) {
      const double t = (zc - o.z()) / d.z();
      if (t < 0.0) continue;
      const double px = ox + t * d.x();
      const double py = oy + t * d.y();
      if (px * px + py * py <= r * r) best = std::min(best, t);
    }
  }
  // A ray starting inside the solid hits immediately.
  if (ox * ox + oy * oy <= r * r && o.z() >= 0.0 && o.z() <= obs.height) return 0.0;
  return std::isfinite(best) ? best : kMiss;
}

double ray_sphere(const Vec3& o, const Vec3& d, const Vec3& center, double radius) {
  const Vec3 rel = o - center;
  const double b = 2.0 * rel.dot(d);
  const double c = rel.squaredNorm() - radius * radius;
  const double disc = b * b - 4.0 * c;  // |d| = 1
  if (disc < 0.0) return kMiss;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / 2.0;
  if (t0 >= 0.0) return t0;
  const double t1 = (-b + sq) / 2.0;
  if (t1 >= 0.0) return 0.0;  // origin inside
  return kMiss;
}

double ray_tool_box(const Vec3& o, const Vec3& d, const ToolRegion& tool,
                    const Pose& ee) {
  if (tool.empty()) return kMiss;
  const Quat inv = ee.orientation.conjugate();
  const Vec3 ol = inv * (o - ee.position);
  const Vec3 dl = inv * d;
  const Vec3 half = 0.5 * tool.size;
  return ray_aabb(ol, dl, tool.offset - half, tool.offset + half);
}

}  // namespace

void CameraModel::validate() const {
  if (!(fov_h > 0.0 && fov_h < M_PI) || !(fov_v > 0.0 && fov_v < M_PI))
    throw std::invalid_argument("camera: fov must be in (0, pi)");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("camera: image dims must be positive");
  if (max_range <= 0.0) throw std::invalid_argument("camera: max_range must be > 0");
  if (noise_sigma < 0.0 || dropout < 0.0 || dropout > 1.0)
    throw std::invalid_argument("camera: bad noise parameters");
}

Vec3 CameraModel::pixel_ray(int u, int v) const {
  const double nx = ((u + 0.5) / width * 2.0 - 1.0) * std::tan(0.5 * fov_h);
  const double ny = ((v + 0.5) / height * 2.0 - 1.0) * std::tan(0.5 * fov_v);
  const Vec3 local = Vec3(nx, ny, 1.0).normalized();
  return pose.orientation * local;
}

double ray_first_hit(const Vec3& origin, const Vec3& dir, const world::Scene& scene,
                     const std::vector<kin::WorldSphere>& robot_spheres,
                     const ToolRegion& tool, const Pose& ee_pose, double max_range) {
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](double t) {
    if (t >= 0.0 && t < best) best = t;
  };
  for (const auto& obs : scene.obstacles) consider(ray_obstacle(origin, dir, obs));
  if (scene.table_height > 0.0) {
    Vec3 hi = scene.workspace_max();
    hi.z() = scene.workspace_origin.z() + scene.table_height;
    consider(ray_aabb(origin, dir, scene.workspace_origin, hi));
  }
  for (const auto& s : robot_spheres) consider(ray_sphere(origin, dir, s.center, s.radius));
  consider(ray_tool_box(origin, dir, tool, ee_pose));
  if (!std::isfinite(best) || best > max_range) return kMiss;
  return best;
}

DepthImage render_depth(const CameraModel& cam, const world::Scene& scene,
                        const std::vector<kin::WorldSphere>& robot_spheres,
                        const ToolRegion& tool, const Pose& ee_pose, Rng* noise_rng) {
  cam.validate();
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.depth.assign(static_cast<std::size_t>(cam.width) * cam.height, kNoReturn);
  const Vec3 origin = cam.pose.position;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = cam.pixel_ray(u, v);
      double t = ray_first_hit(origin, dir, scene, robot_spheres, tool, ee_pose,
                               cam.max_range);
      if (t < 0.0) continue;
      if (noise_rng != nullptr) {
        if (noise_rng->bernoulli(cam.dropout)) continue;
        t += cam.noise_sigma * noise_rng->normal();
        t = std::clamp(t, 0.0, cam.max_range);
      }
      img.at(u, v) = static_cast<float>(t);
    }
  }
  return img;
}

std::vector<Vec3> depth_to_cloud(const CameraModel& cam, const DepthImage& depth) {
  if (depth.width != cam.width || depth.height != cam.height)
    throw std::invalid_argument("depth_to_cloud: image dims do not match camera");
  std::vector<Vec3> cloud;
  cloud.reserve(depth.depth.size() / 4);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      const float d = depth.at(u, v);
      if (d < 0.0f) continue;
      cloud.push_back(cam.pose.position + static_cast<double>(d) * cam.pixel_ray(u, v));
    }
  return cloud;
}

void save_pgm(const std::string& path, const DepthImage& depth, double max_range) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_pgm: cannot open " + path);
  os << "P5\n" << depth.width << " " << depth.height << "\n255\n";
  for (float d : depth.depth) {
    unsigned char px = 0;
    if (d >= 0.0f)
      px = static_cast<unsigned char>(
          std::clamp(255.0 * (1.0 - d / max_range), 0.0, 255.0));
    os.put(static_cast<char>(px));
  }
}

}  // namespace reflex::perception
