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

#ifndef REFLEX_KINEMATICS_CHAIN_HPP_
#define REFLEX_KINEMATICS_CHAIN_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reflex/core/pose.hpp"

namespace reflex::kin {

using VecX = Eigen::VectorXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Collision proxy sphere attached to one link frame.
struct BodySphere {
  int link = 0;               // frame index in [0, n_joints]
  Vec3 center = Vec3::Zero();  // offset in that link frame, meters
  double radius = 0.0;
};

/// Serial revolute chain. Frame i (i < n) is the link frame after joint i:
///   frame[i] = frame[i-1] * offset[i] * Rot(axis[i], q[i])
/// frame[n] = frame[n-1] * offset[n] is the flange. `ee_link` selects the
/// end-effector frame, normally n.
struct SerialChain {
  int n_joints = 0;
  std::vector<Vec3> joint_axes;    // unit vectors, in the joint's local frame
  std::vector<Pose> link_offsets;  // n_joints + 1 fixed parent transforms
  VecX joint_limits_lo;
  VecX joint_limits_hi;
  VecX joint_vel_limits;  // rad/s, per joint
  std::vector<BodySphere> body_spheres;
  int ee_link = 0;
  std::string name;

  /// Throws std::invalid_argument on malformed descriptions (non-unit axes,
  /// lo >= hi, non-positive sphere radii, bad ee_link).
  void validate() const;

  double reach() const;  // sum of per-offset translation norms (upper bound)
};

struct JointState {
  VecX positions;
  VecX velocities;
};

/// Poses for frames 0..n plus the selected end-effector pose.
struct FkResult {
  std::vector<Pose> link_poses;  // size n_joints + 1
  Pose ee;
};

FkResult forward_kinematics(const SerialChain& chain, const VecX& q);

/// World-frame joint origins and rotation axes, as needed for Jacobians.
struct JointFrames {
  std::vector<Vec3> origins;  // joint i origin in world
  std::vector<Vec3> axes;     // joint i unit axis in world
  FkResult fk;
};

JointFrames joint_frames(const SerialChain& chain, const VecX& q);

/// Geometric Jacobian of the end-effector: rows 0-2 linear, rows 3-5 angular.
Mat6X jacobian(const SerialChain& chain, const VecX& q);

/// Positional Jacobian (3 x n) of a world-frame point rigidly attached to
/// `link`. Columns for joints beyond the link are zero.
Eigen::Matrix3Xd point_jacobian(const SerialChain& chain, const JointFrames& frames,
                                int link, const Vec3& world_point);

struct WorldSphere {
  Vec3 center;
  double radius;
  int link;
};

std::vector<WorldSphere> body_spheres_world(const SerialChain& chain, const VecX& q);
std::vector<WorldSphere> body_spheres_world(const SerialChain& chain, const FkResult& fk);

VecX clamp_to_limits(const SerialChain& chain, const VecX& q);

/// Per-joint velocity saturation: the returned target moves from q_from
/// toward q_to by at most vel_limit * dt per joint.
VecX rate_limit(const SerialChain& chain, const VecX& q_from, const VecX& q_to,
                double dt);

/// Planar chain in the xy plane: all axes +z, links along +x. Unit link
/// lengths give the classic prefix-sum FK used by the tests.
SerialChain make_planar_chain(const std::vector<double>& link_lengths,
                              double base_height = 0.0);

/// Desk-sized 3-DOF planar arm used by the small training configs.
SerialChain make_planar3_desk();

/// 6-DOF arm with roughly 0.8 m reach, in the spirit of a small cobot.
SerialChain make_arm6();

}  // namespace reflex::kin

#endif  // REFLEX_KINEMATICS_CHAIN_HPP_
