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

#ifndef REFLEX_BASELINES_APF_HPP_
#define REFLEX_BASELINES_APF_HPP_

#include "reflex/baselines/clearance.hpp"
#include "reflex/control/controller.hpp"
#include "reflex/kinematics/chain.hpp"

namespace reflex::baselines {

/// Velocity-space artificial potential field. Attraction is a resolved-rate
/// pull on the end-effector; each body sphere within the influence distance
/// adds the Khatib repulsion speed k_rep * (1/d - 1/d0) / d^2 along the
/// clearance gradient. Every term maps through a damped least-squares
/// inverse of its own point Jacobian, and a mid-range centering term in the
/// task nullspace keeps the arm from parking in folded configurations.
struct ApfConfig {
  double k_attr = 2.0;      // attraction gain, 1/s
  double k_rep = 0.02;
  double d0 = 0.15;         // influence distance, m
  double max_speed = 1.0;   // per-term task velocity cap, m/s
  double k_center = 1.0;    // nullspace pull toward mid-range joints, 1/s

  void validate() const;
};

/// One velocity-level APF step mapped through joint rate limits. The tool
/// box corners repel like body spheres of zero radius so the mounted tool is
/// at least crudely accounted for.
kin::VecX apf_step(const kin::SerialChain& chain, const kin::VecX& q,
                   const Pose& target, const ToolRegion& tool,
                   const ClearanceFn& clearance, const ApfConfig& cfg,
                   double dt = control::kDt);

}  // namespace reflex::baselines

#endif  // REFLEX_BASELINES_APF_HPP_
