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

#ifndef REFLEX_RL_TOY_ENV_HPP_
#define REFLEX_RL_TOY_ENV_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reflex/core/rng.hpp"
#include "reflex/rl/env.hpp"

namespace reflex::rl {

/// Point mass on the unit square with a forbidden vertical strip between the
/// start and the goal. The strip leaves a gap near the top edge, so the only
/// low-cost route is a detour; the straight line racks up constraint cost.
/// Geometry is simple enough to verify the constrained optimum by hand.
class ToyStripEnv : public Env {
 public:
  static constexpr double kStripLoX = 0.45;
  static constexpr double kStripHiX = 0.55;
  static constexpr double kStripTopY = 0.7;  // gap above this height
  static constexpr double kActionBound = 0.05;
  static constexpr double kGoalTolerance = 0.05;
  static constexpr int kMaxSteps = 120;

  int obs_dim() const override { return 4; }
  int n_actions() const override { return 2; }

  std::vector<float> reset(std::uint64_t seed) override {
    Rng rng = Rng::derive(seed, 17);
    x_ = 0.1 + rng.uniform(-0.02, 0.02);
    y_ = 0.5 + rng.uniform(-0.02, 0.02);
    t_ = 0;
    done_ = false;
    reached_ = false;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    if (done_) throw std::logic_error("toy env: step after episode end");
    if (action.size() != 2) throw std::invalid_argument("toy env: action size");
    x_ = std::clamp(x_ + std::clamp(action[0], -kActionBound, kActionBound), 0.0, 1.0);
    y_ = std::clamp(y_ + std::clamp(action[1], -kActionBound, kActionBound), 0.0, 1.0);
    ++t_;

    StepResult res;
    const double dist_sq = (x_ - kGoalX) * (x_ - kGoalX) + (y_ - kGoalY) * (y_ - kGoalY);
    res.reward = 1.0 - std::clamp(dist_sq, 0.0, 1.0);
    res.costs[0] = in_strip(x_, y_) ? 1.0 : 0.0;
    reached_ = std::sqrt(dist_sq) < kGoalTolerance;
    res.terminal = reached_;
    res.truncated = !res.terminal && t_ >= kMaxSteps;
    done_ = res.terminal || res.truncated;
    res.obs = observe();
    return res;
  }

  bool success() const override { return reached_; }

  static bool in_strip(double x, double y) {
    return x >= kStripLoX && x <= kStripHiX && y <= kStripTopY;
  }

 private:
  static constexpr double kGoalX = 0.9;
  static constexpr double kGoalY = 0.5;

  std::vector<float> observe() const {
    return {static_cast<float>(x_), static_cast<float>(y_),
            static_cast<float>(kGoalX - x_), static_cast<float>(kGoalY - y_)};
  }

  double x_ = 0.0;
  double y_ = 0.0;
  int t_ = 0;
  bool done_ = true;
  bool reached_ = false;
};

}  // namespace reflex::rl

#endif  // REFLEX_RL_TOY_ENV_HPP_
