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

#include "reflex/kinematics/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace reflex::kin {

void SerialChain::validate() const {
  const auto n = static_cast<std::size_t>(n_joints);
  if (n_joints <= 0) throw std::invalid_argument("chain: n_joints must be > 0");
  if (joint_axes.size() != n) throw std::invalid_argument("chain: joint_axes size");
  if (link_offsets.size() != n + 1)
    throw std::invalid_argument("chain: link_offsets must have n_joints + 1 entries");
  if (joint_limits_lo.size() != n_joints || joint_limits_hi.size() != n_joints ||
      joint_vel_limits.size() != n_joints)
    throw std::invalid_argument("chain: limit vector size");
  for (const auto& axis : joint_axes) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("chain: joint axes must be unit-norm");
  }
  for (int i = 0; i < n_joints; ++i) {
    if (!(joint_limits_lo[i] < joint_limits_hi[i]))
      throw std::invalid_argument("chain: joint_limits_lo must be < hi");
    if (!(joint_vel_limits[i] > 0.0))
      throw std::invalid_argument("chain: joint velocity limits must be > 0");
  }
  for (const auto& s : body_spheres) {
    if (!(s.radius > 0.0)) throw std::invalid_argument("chain: sphere radius must be > 0");
    if (s.link < 0 || s.link > n_joints)
      throw std::invalid_argument("chain: sphere link index out of range");
  }
  if (ee_link < 0 || ee_link > n_joints)
    throw std::invalid_argument("chain: ee_link out of range");
}

double SerialChain::reach() const {
  double r = 0.0;
  for (const auto& o : link_offsets) r += o.position.norm();
  return r;
}

namespace {

void check_q(const SerialChain& chain, const VecX& q) {
  if (q.size() != chain.n_joints)
    throw std::invalid_argument("q dimension does not match chain");
}

}  // namespace

FkResult forward_kinematics(const SerialChain& chain, const VecX& q) {
  check_q(chain, q);
  FkResult out;
  out.link_poses.resize(static_cast<std::size_t>(chain.n_joints) + 1);
  Pose cursor = Pose::identity();
  for (int i = 0; i < chain.n_joints; ++i) {
    cursor = cursor * chain.link_offsets[static_cast<std::size_t>(i)];
    Pose joint;
    joint.orientation =
        Quat(Eigen::AngleAxisd(q[i], chain.joint_axes[static_cast<std::size_t>(i)]));
    cursor = cursor * joint;
    out.link_poses[static_cast<std::size_t>(i)] = cursor;
  }
  cursor = cursor * chain.link_offsets[static_cast<std::size_t>(chain.n_joints)];
  out.link_poses[static_cast<std::size_t>(chain.n_joints)] = cursor;
  out.ee = out.link_poses[static_cast<std::size_t>(chain.ee_link)];
  return out;
}

JointFrames joint_frames(const SerialChain& chain, const VecX& q) {
  check_q(chain, q);
  JointFrames out;
  out.origins.resize(static_cast<std::size_t>(chain.n_joints));
  out.axes.resize(static_cast<std::size_t>(chain.n_joints));
  out.fk.link_poses.resize(static_cast<std::size_t>(chain.n_joints) + 1);
  Pose cursor = Pose::identity();
  for (int i = 0; i < chain.n_joints; ++i) {
    cursor = cursor * chain.link_offsets[static_cast<std::size_t>(i)];
    out.origins[static_cast<std::size_t>(i)] = cursor.position;
    out.axes[static_cast<std::size_t>(i)] =
        cursor.orientation * chain.joint_axes[static_cast<std::size_t>(i)];
    Pose joint;
    joint.orientation =
        Quat(Eigen::AngleAxisd(q[i], chain.joint_axes[static_cast<std::size_t>(i)]));
    cursor = cursor * joint;
    out.fk.link_poses[static_cast<std::size_t>(i)] = cursor;
  }
  cursor = cursor * chain.link_offsets[static_cast<std::size_t>(chain.n_joints)];
  out.fk.link_poses[static_cast<std::size_t>(chain.n_joints)] = cursor;
  out.fk.ee = out.fk.link_poses[static_cast<std::size_t>(chain.ee_link)];
  return out;
}

Mat6X jacobian(const SerialChain& chain, const VecX& q) {
  const JointFrames frames = joint_frames(chain, q);
  const Vec3 p_ee = frames.fk.ee.position;
  Mat6X jac(6, chain.n_joints);
  for (int i = 0; i < chain.n_joints; ++i) {
    // Joints strictly downstream of the end-effector frame do not move it.
    // Joint ee_link itself still spins the frame about its own origin.
    if (i > chain.ee_link) {
      jac.col(i).setZero();
      continue;
    }
    const Vec3& z = frames.axes[static_cast<std::size_t>(i)];
    const Vec3& p = frames.origins[static_cast<std::size_t>(i)];
    jac.block<3, 1>(0, i) = z.cross(p_ee - p);
    jac.block<3, 1>(3, i) = z;
  }
  return jac;
}

Eigen::Matrix3Xd point_jacobian(const SerialChain& chain, const JointFrames& frames,
                                int link, const Vec3& world_point) {
  Eigen::Matrix3Xd jac(3, chain.n_joints);
  for (int i = 0; i < chain.n_joints; ++i) {
    if (i > link) {
      jac.col(i).setZero();
      continue;
    }
    const Vec3& z = frames.axes[static_cast<std::size_t>(i)];
    const Vec3& p = frames.origins[static_cast<std::size_t>(i)];
    jac.col(i) = z.cross(world_point - p);
  }
  return jac;
}

std::vector<WorldSphere> body_spheres_world(const SerialChain& chain, const FkResult& fk) {
  std::vector<WorldSphere> out;
  out.reserve(chain.body_spheres.size());
  for (const auto& s : chain.body_spheres) {
    const Pose& link = fk.link_poses[static_cast<std::size_t>(s.link)];
    out.push_back(WorldSphere{link * s.center, s.radius, s.link});
  }
  return out;
}

std::vector<WorldSphere> body_spheres_world(const SerialChain& chain, const VecX& q) {
  return body_spheres_world(chain, forward_kinematics(chain, q));
}

VecX clamp_to_limits(const SerialChain& chain, const VecX& q) {
  check_q(chain, q);
  return q.cwiseMax(chain.joint_limits_lo).cwiseMin(chain.joint_limits_hi);
}

VecX rate_limit(const SerialChain& chain, const VecX& q_from, const VecX& q_to,
                double dt) {
  check_q(chain, q_from);
  check_q(chain, q_to);
  VecX out(chain.n_joints);
  for (int i = 0; i < chain.n_joints; ++i) {
    const double max_step = chain.joint_vel_limits[i] * dt;
    const double delta = q_to[i] - q_from[i];
    out[i] = q_from[i] + std::clamp(delta, -max_step, max_step);
  }
  return out;
}

SerialChain make_planar_chain(const std::vector<double>& link_lengths,
                              double base_height) {
  SerialChain chain;
  chain.name = "planar";
  chain.n_joints = static_cast<int>(link_lengths.size());
  chain.ee_link = chain.n_joints;
  chain.joint_axes.assign(static_cast<std::size_t>(chain.n_joints), Vec3::UnitZ());
  chain.link_offsets.resize(static_cast<std::size_t>(chain.n_joints) + 1);
  chain.link_offsets[0] = Pose{Vec3(0, 0, base_height), Quat::Identity()};
  for (int i = 1; i <= chain.n_joints; ++i) {
    chain.link_offsets[static_cast<std::size_t>(i)] =
        Pose{Vec3(link_lengths[static_cast<std::size_t>(i - 1)], 0, 0), Quat::Identity()};
  }
  chain.joint_limits_lo = VecX::Constant(chain.n_joints, -2.97);
  chain.joint_limits_hi = VecX::Constant(chain.n_joints, 2.97);
  chain.joint_vel_limits = VecX::Constant(chain.n_joints, M_PI);
  double run = 0.0;
  for (int i = 0; i < chain.n_joints; ++i) {
    const double len = link_lengths[static_cast<std::size_t>(i)];
    // Two proxy spheres per link, at mid-span and at the distal joint.
    chain.body_spheres.push_back(
        BodySphere{i, Vec3(0.5 * len, 0, 0), std::max(0.035, 0.12 * len)});
    chain.body_spheres.push_back(
        BodySphere{i, Vec3(len, 0, 0), std::max(0.035, 0.12 * len)});
    run += len;
  }
  (void)run;
  return chain;
}

SerialChain make_planar3_desk() {
  SerialChain chain = make_planar_chain({0.16, 0.14, 0.10}, 0.22);
  chain.name = "planar3_desk";
  chain.body_spheres.clear();
  chain.body_spheres.push_back(BodySphere{0, Vec3(0.08, 0, 0), 0.03});
  chain.body_spheres.push_back(BodySphere{0, Vec3(0.16, 0, 0), 0.03});
  chain.body_spheres.push_back(BodySphere{1, Vec3(0.07, 0, 0), 0.03});
  chain.body_spheres.push_back(BodySphere{1, Vec3(0.14, 0, 0), 0.03});
  chain.body_spheres.push_back(BodySphere{2, Vec3(0.05, 0, 0), 0.03});
  chain.body_spheres.push_back(BodySphere{2, Vec3(0.10, 0, 0), 0.03});
  return chain;
}

SerialChain make_arm6() {
  SerialChain chain;
  chain.name = "arm6";
  chain.n_joints = 6;
  chain.ee_link = 6;
  chain.joint_axes = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitY(),
                      Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ()};
  chain.link_offsets.resize(7);
  chain.link_offsets[0] = Pose{Vec3(0, 0, 0.15), Quat::Identity()};   // base riser
  chain.link_offsets[1] = Pose{Vec3(0, 0, 0.10), Quat::Identity()};   // shoulder
  chain.link_offsets[2] = Pose{Vec3(0, 0, 0.30), Quat::Identity()};   // upper arm
  chain.link_offsets[3] = Pose{Vec3(0, 0, 0.25), Quat::Identity()};   // forearm
  chain.link_offsets[4] = Pose{Vec3(0, 0, 0.08), Quat::Identity()};   // wrist 1
  chain.link_offsets[5] = Pose{Vec3(0, 0, 0.07), Quat::Identity()};   // wrist 2
  chain.link_offsets[6] = Pose{Vec3(0, 0, 0.05), Quat::Identity()};   // flange
  chain.joint_limits_lo = VecX::Constant(6, -3.05);
  chain.joint_limits_hi = VecX::Constant(6, 3.05);
  chain.joint_vel_limits = VecX::Constant(6, 2.8);
  chain.body_spheres = {
      BodySphere{1, Vec3(0, 0, 0.05), 0.07},  BodySphere{2, Vec3(0, 0, 0.10), 0.06},
      BodySphere{2, Vec3(0, 0, 0.22), 0.06},  BodySphere{3, Vec3(0, 0, 0.08), 0.05},
      BodySphere{3, Vec3(0, 0, 0.18), 0.05},  BodySphere{4, Vec3(0, 0, 0.04), 0.05},
      BodySphere{5, Vec3(0, 0, 0.04), 0.04},  BodySphere{6, Vec3(0, 0, 0.0), 0.04},
  };
  return chain;
}

}  // namespace reflex::kin
