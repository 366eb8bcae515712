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

#ifndef REFLEX_CORE_POSE_HPP_
#define REFLEX_CORE_POSE_HPP_

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace reflex {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform as position + unit quaternion (w, x, y, z).
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return Pose{}; }

  static Pose from_isometry(const Eigen::Isometry3d& iso) {
    Pose p;
    p.position = iso.translation();
    p.orientation = Quat(iso.rotation()).normalized();
    return p;
  }

  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
    iso.linear() = orientation.toRotationMatrix();
    iso.translation() = position;
    return iso;
  }

  Pose operator*(const Pose& rhs) const {
    Pose out;
    out.orientation = (orientation * rhs.orientation).normalized();
    out.position = position + orientation * rhs.position;
    return out;
  }

  Vec3 operator*(const Vec3& p) const { return position + orientation * p; }

  Pose inverse() const {
    Pose out;
    out.orientation = orientation.conjugate();
    out.position = -(out.orientation * position);
    return out;
  }
};

/// Rotation vector (axis * angle, radians) taking `from` to `to`, expressed in
/// the common parent frame. Small-angle safe.
inline Vec3 orientation_error(const Quat& to, const Quat& from) {
  Quat err = to * from.conjugate();
  if (err.w() < 0.0) err.coeffs() *= -1.0;
  const Vec3 v(err.x(), err.y(), err.z());
  const double v_norm = v.norm();
  if (v_norm < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(v_norm, err.w());
  return (angle / v_norm) * v;
}

/// Absolute rotation angle between two orientations, in [0, pi].
inline double orientation_distance(const Quat& a, const Quat& b) {
  double w = std::abs((a * b.conjugate()).w());
  w = std::min(1.0, std::max(0.0, w));
  return 2.0 * std::acos(w);
}

/// Intrinsic ZYX (yaw, pitch, roll) angles, returned as (roll, pitch, yaw).
inline Vec3 quat_to_euler(const Quat& q) {
  const Eigen::Matrix3d r = q.toRotationMatrix();
  const double pitch = std::asin(std::min(1.0, std::max(-1.0, -r(2, 0))));
  double roll, yaw;
  if (std::abs(r(2, 0)) < 1.0 - 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return Vec3(roll, pitch, yaw);
}

inline Quat quat_from_yaw(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

}  // namespace reflex

#endif  // REFLEX_CORE_POSE_HPP_
