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

#ifndef REFLEX_BASELINES_MPPI_HPP_
#define REFLEX_BASELINES_MPPI_HPP_

#include <vector>

#include "reflex/baselines/clearance.hpp"
#include "reflex/control/controller.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/kinematics/chain.hpp"

namespace reflex::baselines {

struct MppiConfig {
  double horizon_s = 0.5;
  double dt = control::kDt;
  int n_samples = 4000;
  double temperature = 0.05;  // exponential weighting scale
  double sigma_u = 0.03;      // rad, control perturbation sd per joint
  double w_tracking = 20.0;
  double w_collision = 100.0;
  double w_smooth = 0.1;
  double collision_margin = 0.03;  // m, hinge margin on clearances
  int n_workers = 1;

  int steps() const;
  void validate() const;
};

struct MppiPlan {
  std::vector<kin::VecX> controls;  // updated nominal, steps() joint deltas
  bool infeasible = false;          // every sample predicted a collision
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double expected_cost = 0.0;           // weighted mean of sample costs
  std::vector<double> weights;          // per sample, sums to 1
  std::vector<double> sample_costs;     // per sample
};

/// One path-integral planning step: perturb the nominal sequence, roll out
/// kinematically, weight by exp(-(S - S_min)/temperature), and return the
/// noise-weighted update. Noise is drawn up front in (sample, step, joint)
/// order and rollouts reduce in sample order, so results are identical at
/// any worker count. If every sample collides the plan is all zeros and
/// flagged infeasible.
MppiPlan mppi_plan(const kin::SerialChain& chain, const kin::VecX& q,
                   const std::vector<kin::VecX>& nominal, const Pose& target,
                   const ToolRegion& tool, const ClearanceFn& clearance,
                   const MppiConfig& cfg, Rng& rng);

/// Receding-horizon wrapper: keeps the nominal sequence between calls,
/// shifting it by one executed step.
class MppiController {
 public:
  MppiController(const kin::SerialChain& chain, const MppiConfig& cfg,
                 std::uint64_t seed);

  /// Plans from q and returns the rate-limited next joint command.
  kin::VecX step(const kin::VecX& q, const Pose& target, const ToolRegion& tool,
                 const ClearanceFn& clearance);

  const MppiPlan& last_plan() const { return last_plan_; }
  void reset(std::uint64_t seed);

 private:
  kin::SerialChain chain_;
  MppiConfig cfg_;
  Rng rng_;
  std::vector<kin::VecX> nominal_;
  MppiPlan last_plan_;
};

}  // namespace reflex::baselines

#endif  // REFLEX_BASELINES_MPPI_HPP_
