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

#ifndef REFLEX_SAFETY_SAFETY_HPP_
#define REFLEX_SAFETY_SAFETY_HPP_

#include <memory>
#include <vector>

#include "reflex/core/rng.hpp"
#include "reflex/core/tool_region.hpp"
#include "reflex/netcore/layers.hpp"

namespace reflex::safety {

inline constexpr double kDefaultGammaSafe = 0.95;
inline constexpr double kSwitchThreshold = 0.8;
inline constexpr double kSwitchHysteresis = 0.1;

/// One Bellman backup for the discounted violation probability. A violation
/// (c = 1) absorbs, so the target saturates at 1.
double bellman_target(double c, double v_next, double gamma_safe);

/// Finite MDP over which the critic recursion has an exact fixed point.
/// Violating states are absorbing for target purposes regardless of their
/// listed transitions.
struct FiniteSafetyMdp {
  struct Transition {
    int next = 0;
    double prob = 0.0;
  };
  // transitions[s] lists the successor distribution of state s. A state with
  // no transitions is treated as safe-absorbing (value 0 unless violating).
  std::vector<std::vector<Transition>> transitions;
  std::vector<double> violating;  // c labels in {0,1}

  int n_states() const { return static_cast<int>(violating.size()); }
  void validate() const;
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<double> sup_residuals;  // one entry per sweep
  int sweeps = 0;
  bool converged = false;
};

ValueIterationResult tabular_value_iteration(const FiniteSafetyMdp& mdp,
                                             double gamma_safe, double tol,
                                             int max_sweeps = 10000);

/// Monte-Carlo estimate of the discounted violation probability from one
/// start state, truncated at horizon steps. Used as an independent oracle.
double monte_carlo_violation_value(const FiniteSafetyMdp& mdp, int start,
                                   double gamma_safe, int episodes, int horizon,
                                   Rng& rng);

/// Training tuple collected from nominal-controller rollouts.
struct SafetySample {
  std::vector<float> features;
  float c_body = 0.0f;
  float c_tool = 0.0f;
  std::vector<float> next_features;
  bool terminal = false;  // episode ended without violation
};

/// Two sigmoid-squashed MLP value heads over a shared feature vector.
class SafetyCritic {
 public:
  SafetyCritic(int feature_dim, const std::vector<int>& hidden, Rng& rng);

  double value_body(const std::vector<float>& features);
  double value_tool(const std::vector<float>& features);

  int feature_dim() const { return feature_dim_; }
  std::vector<net::ParamRef<float>> params();
  net::Sequential<float>& body_head() { return *body_; }
  net::Sequential<float>& tool_head() { return *tool_; }

 private:
  int feature_dim_;
  std::unique_ptr<net::Sequential<float>> body_, tool_;
};

struct FitOptions {
  double gamma_safe = kDefaultGammaSafe;
  int epochs = 20;
  int batch_size = 64;
  double lr = 1e-3;
  unsigned long long seed = 1;
};

struct FitStats {
  std::vector<double> epoch_loss;  // mean squared error per epoch
};

/// Fitted value iteration: targets are recomputed against a frozen snapshot
/// of the heads at the start of every epoch, then regressed with Adam.
FitStats fit_safety_critic(SafetyCritic& critic, const std::vector<SafetySample>& data,
                           const FitOptions& opts);

/// Mode-aware combination of the two head values.
double aggregate(double v_body, double v_tool, Mode mode);

enum class ControlState { kNominal, kReactive };

/// Threshold switch with a hysteresis band to avoid chattering at 50 Hz.
ControlState switch_decision(double v_max, ControlState state,
                             double threshold = kSwitchThreshold,
                             double hysteresis = kSwitchHysteresis);

}  // namespace reflex::safety

#endif  // REFLEX_SAFETY_SAFETY_HPP_
