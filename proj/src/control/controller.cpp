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

#include "reflex/control/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reflex::control {

void ControllerState::reset(const kin::VecX& q0) {
  active = safety::ControlState::kNominal;
  q_des_prev1 = q0;
  q_des_prev2 = q0;
  q_history.assign(kJointHistory, q0);
}

void ControllerState::push_joint(const kin::VecX& q) {
  q_history.insert(q_history.begin(), q);
  q_history.resize(kJointHistory, q);
}

void ControllerState::push_command(const kin::VecX& q_des) {
  q_des_prev2 = q_des_prev1;
  q_des_prev1 = q_des;
}

kin::VecX nominal_step(const kin::SerialChain& chain, const kin::VecX& q,
                       const Command& cmd, double dt) {
  const kin::VecX dq = kin::dls_ik_step(chain, q, cmd.target, 0.05);
  const kin::VecX target = kin::clamp_to_limits(chain, q + dq);
  return kin::rate_limit(chain, q, target, dt);
}

kin::VecX policy_step(const kin::SerialChain& chain, const kin::VecX& q,
                      const kin::VecX& action, double bound) {
  if (action.size() != q.size())
    throw std::invalid_argument("policy_step: action size mismatch");
  kin::VecX a = action;
  for (int i = 0; i < a.size(); ++i) a[i] = std::clamp(a[i], -bound, bound);
  return kin::clamp_to_limits(chain, q + a);
}

kin::VecX hybrid_step(const kin::SerialChain& chain, ControllerState& state,
                      const kin::VecX& q, const kin::VecX& action, double v_max,
                      const Command& cmd, double dt, HybridTelemetry* telemetry) {
  state.active = safety::switch_decision(v_max, state.active);
  kin::VecX q_des = policy_step(chain, q, action);
  bool fallback = false;
  int iters = 0;
  double pos_res = 0.0, rot_res = 0.0;
  if (state.active == safety::ControlState::kNominal) {
    kin::IkOptions opts;
    opts.max_iters = kHybridIkIters;
    const kin::IkResult ik = kin::solve_ik(chain, q_des, cmd.target, opts);
    iters = ik.iters;
    pos_res = ik.pos_residual;
    rot_res = ik.rot_residual;
    // The solver backtracks, so ik.q is never worse than the seed. Taking it
    // even when unconverged keeps the tracker moving toward distant targets;
    // the rate limit below bounds the actual motion per tick.
    q_des = ik.q;
    fallback = !ik.converged;
  }
  q_des = kin::rate_limit(chain, q, kin::clamp_to_limits(chain, q_des), dt);
  if (telemetry != nullptr) {
    telemetry->active = state.active;
    telemetry->ik_fallback = fallback;
    telemetry->ik_iters = iters;
    telemetry->pos_residual = pos_res;
    telemetry->rot_residual = rot_res;
  }
  return q_des;
}

bool tool_corner_violation(const world::VoxelGrid& esdf, const Pose& ee_pose,
                           const ToolRegion& tool) {
  if (tool.empty()) return false;
  const double threshold = 0.5 * esdf.resolution;
  for (const Vec3& corner : tool.corners_world(ee_pose)) {
    if (world::grid_sample(esdf, corner).value < threshold) return true;
  }
  return false;
}

bool body_collision(const world::VoxelGrid& esdf,
                    const std::vector<kin::WorldSphere>& spheres) {
  for (const auto& s : spheres) {
    if (world::grid_sample(esdf, s.center).value < s.radius) return true;
  }
  return false;
}

std::array<double, 4> constraint_costs(const kin::SerialChain& chain,
                                       const world::VoxelGrid& esdf,
                                       const kin::VecX& q_prev, const kin::VecX& q_next,
                                       const Command& cmd, double dt) {
  std::array<double, 4> c = {0.0, 0.0, 0.0, 0.0};
  const kin::FkResult fk_prev = kin::forward_kinematics(chain, q_prev);
  const kin::FkResult fk_next = kin::forward_kinematics(chain, q_next);

  if (body_collision(esdf, kin::body_spheres_world(chain, fk_next))) c[0] = 1.0;
  if (cmd.mode == Mode::kProtective &&
      tool_corner_violation(esdf, fk_next.ee, cmd.tool))
    c[1] = 1.0;
  const double ee_speed = (fk_next.ee.position - fk_prev.ee.position).norm() / dt;
  if (ee_speed > kEeSpeedLimit) c[2] = 1.0;
  for (int i = 0; i < chain.n_joints; ++i) {
    const double qd = std::abs(q_next[i] - q_prev[i]) / dt;
    if (qd > kJointSpeedFactor * chain.joint_vel_limits[i]) {
      c[3] = 1.0;
      break;
    }
  }
  return c;
}

std::vector<float> build_proprio(const ControllerState& state, const Command& cmd) {
  std::vector<float> out;
  if (state.q_history.empty())
    throw std::invalid_argument("build_proprio: controller state not reset");
  const int n = static_cast<int>(state.q_history.front().size());
  out.reserve(static_cast<std::size_t>(proprio_dim(n)));
  for (const auto& q : state.q_history)
    for (int i = 0; i < n; ++i) out.push_back(static_cast<float>(q[i]));
  for (int a = 0; a < 3; ++a)
    out.push_back(static_cast<float>(cmd.target.position[a]));
  const Vec3 euler = quat_to_euler(cmd.target.orientation);
  for (int a = 0; a < 3; ++a) out.push_back(static_cast<float>(euler[a]));
  for (int a = 0; a < 3; ++a) out.push_back(static_cast<float>(cmd.tool.offset[a]));
  for (int a = 0; a < 3; ++a) out.push_back(static_cast<float>(cmd.tool.size[a]));
  out.push_back(cmd.mode == Mode::kProtective ? 1.0f : 0.0f);
  return out;
}

std::vector<float> build_observation(const std::vector<float>& latent,
                                     const ControllerState& state, const Command& cmd) {
  std::vector<float> out = latent;
  const std::vector<float> proprio = build_proprio(state, cmd);
  out.insert(out.end(), proprio.begin(), proprio.end());
  return out;
}

int proprio_dim(int n_joints) { return kJointHistory * n_joints + 3 + 3 + 6 + 1; }

int observation_dim(int latent_dim, int n_joints) {
  return latent_dim + proprio_dim(n_joints);
}

}  // namespace reflex::control
