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

#ifndef REFLEX_CONTROL_CONTROLLER_HPP_
#define REFLEX_CONTROL_CONTROLLER_HPP_

#include <array>
#include <vector>

#include "reflex/core/pose.hpp"
#include "reflex/core/tool_region.hpp"
#include "reflex/kinematics/chain.hpp"
#include "reflex/kinematics/ik.hpp"
#include "reflex/safety/safety.hpp"
#include "reflex/world/voxel_grid.hpp"

namespace reflex::control {

inline constexpr double kDt = 0.02;             // 50 Hz control period
inline constexpr double kActionBound = 0.05;    // rad per step
inline constexpr double kEeSpeedLimit = 0.5;    // m/s, constraint c3
inline constexpr double kJointSpeedFactor = 0.8;
inline constexpr int kHybridIkIters = 20;
inline constexpr int kJointHistory = 4;

/// External command: where to put the EE, how the tool may interact, and the
/// tool geometry itself.
struct Command {
  Pose target = Pose::identity();
  Mode mode = Mode::kProtective;
  ToolRegion tool;
};

/// Per-controller mutable state: which branch is active, commanded-target
/// history for smoothness terms, and a short joint-position history.
struct ControllerState {
  safety::ControlState active = safety::ControlState::kNominal;
  kin::VecX q_des_prev1;  // q_des at t-1
  kin::VecX q_des_prev2;  // q_des at t-2
  std::vector<kin::VecX> q_history;  // newest first, kJointHistory entries

  void reset(const kin::VecX& q0);
  void push_joint(const kin::VecX& q);
  void push_command(const kin::VecX& q_des);
};

/// One rate-limited damped-least-squares step toward the command target.
kin::VecX nominal_step(const kin::SerialChain& chain, const kin::VecX& q,
                       const Command& cmd, double dt = kDt);

/// Residual action application: q_des = q + clamp(a, +-bound), then joint
/// limits.
kin::VecX policy_step(const kin::SerialChain& chain, const kin::VecX& q,
                      const kin::VecX& action, double bound = kActionBound);

struct HybridTelemetry {
  safety::ControlState active = safety::ControlState::kNominal;
  bool ik_fallback = false;
  int ik_iters = 0;
  double pos_residual = 0.0;
  double rot_residual = 0.0;
};

/// Switch on v_max, then either refine the policy output with warm-started
/// IK (Nominal) or pass it through (Reactive). Output always respects joint
/// and rate limits. IK failure falls back to the raw policy output.
kin::VecX hybrid_step(const kin::SerialChain& chain, ControllerState& state,
                      const kin::VecX& q, const kin::VecX& action, double v_max,
                      const Command& cmd, double dt = kDt,
                      HybridTelemetry* telemetry = nullptr);

/// True iff any tool box corner sits closer than half a voxel to the nearest
/// obstacle according to the ESDF. Zero-size tools never violate.
bool tool_corner_violation(const world::VoxelGrid& esdf, const Pose& ee_pose,
                           const ToolRegion& tool);

/// True iff any collision sphere center has ESDF clearance below its radius.
bool body_collision(const world::VoxelGrid& esdf,
                    const std::vector<kin::WorldSphere>& spheres);

/// Table-style indicator costs for one transition q_prev -> q_next:
/// [0] body collision, [1] tool corner (Protective only), [2] EE speed,
/// [3] joint speed above 0.8x limit.
std::array<double, 4> constraint_costs(const kin::SerialChain& chain,
                                       const world::VoxelGrid& esdf,
                                       const kin::VecX& q_prev, const kin::VecX& q_next,
                                       const Command& cmd, double dt = kDt);

/// Proprioceptive feature block: joint history (kJointHistory frames), target
/// position, target Euler angles, tool offset+size, mode flag.
std::vector<float> build_proprio(const ControllerState& state, const Command& cmd);

/// Frozen observation layout: [latent | proprio].
std::vector<float> build_observation(const std::vector<float>& latent,
                                     const ControllerState& state, const Command& cmd);

int proprio_dim(int n_joints);
int observation_dim(int latent_dim, int n_joints);

}  // namespace reflex::control

#endif  // REFLEX_CONTROL_CONTROLLER_HPP_
