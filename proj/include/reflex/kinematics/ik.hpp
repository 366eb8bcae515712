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

#ifndef REFLEX_KINEMATICS_IK_HPP_
#define REFLEX_KINEMATICS_IK_HPP_

#include <vector>

#include "reflex/kinematics/chain.hpp"

namespace reflex::kin {

/// Stacked task error: position on top, rotation-vector error below.
Eigen::Matrix<double, 6, 1> pose_twist_error(const Pose& target, const Pose& current);

/// One damped-least-squares step toward `target`:
///   dq = J^T (J J^T + damping^2 I)^(-1) e
/// Bounded near singularities: ||dq|| <= ||e|| / (2 * damping).
VecX dls_ik_step(const SerialChain& chain, const VecX& q, const Pose& target,
                 double damping);

struct IkOptions {
  int max_iters = 100;
  double tol_pos = 1e-8;   // meters
  double tol_rot = 1e-7;   // radians
  double damping = 0.05;
  // When set, the combined residual after each accepted iteration is appended.
  std::vector<double>* residual_trace = nullptr;
};

struct IkResult {
  VecX q;
  bool converged = false;
  double pos_residual = 0.0;
  double rot_residual = 0.0;
  int iters = 0;
};

/// Iterative DLS with per-iteration joint-limit clamping and a backtracking
/// step accept rule, so the combined residual never increases. Returns
/// best-effort q with converged=false instead of throwing on failure.
IkResult solve_ik(const SerialChain& chain, const VecX& q0, const Pose& target,
                  const IkOptions& opts = IkOptions{});

}  // namespace reflex::kin

#endif  // REFLEX_KINEMATICS_IK_HPP_
