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

#include "reflex/safety/safety.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reflex/netcore/adam.hpp"

namespace reflex::safety {

double bellman_target(double c, double v_next, double gamma_safe) {
  if (c != 0.0 && c != 1.0)
    throw std::invalid_argument("bellman_target: c must be 0 or 1");
  if (v_next < 0.0 || v_next > 1.0)
    throw std::invalid_argument("bellman_target: v_next must be in [0,1]");
  if (gamma_safe < 0.0 || gamma_safe >= 1.0)
    throw std::invalid_argument("bellman_target: gamma_safe must be in [0,1)");
  return c + (1.0 - c) * gamma_safe * v_next;
}

void FiniteSafetyMdp::validate() const {
  if (transitions.size() != violating.size())
    throw std::invalid_argument("safety mdp: transitions/violating size mismatch");
  for (double c : violating)
    if (c != 0.0 && c != 1.0)
      throw std::invalid_argument("safety mdp: violation labels must be 0 or 1");
  for (std::size_t s = 0; s < transitions.size(); ++s) {
    if (transitions[s].empty()) continue;  // safe-absorbing
    double total = 0.0;
    for (const auto& t : transitions[s]) {
      if (t.next < 0 || t.next >= n_states())
        throw std::invalid_argument("safety mdp: transition target out of range");
      if (t.prob < 0.0)
        throw std::invalid_argument("safety mdp: negative transition probability");
      total += t.prob;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("safety mdp: transition row does not sum to 1");
  }
}

ValueIterationResult tabular_value_iteration(const FiniteSafetyMdp& mdp,
                                             double gamma_safe, double tol,
                                             int max_sweeps) {
  mdp.validate();
  if (gamma_safe < 0.0 || gamma_safe >= 1.0)
    throw std::invalid_argument("value iteration: gamma_safe must be in [0,1)");
  const int n = mdp.n_states();
  ValueIterationResult res;
  res.values.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double residual = 0.0;
    for (int s = 0; s < n; ++s) {
      double expect = 0.0;
      for (const auto& t : mdp.transitions[s]) expect += t.prob * res.values[t.next];
      next[s] = bellman_target(mdp.violating[s], expect, gamma_safe);
      residual = std::max(residual, std::abs(next[s] - res.values[s]));
    }
    res.values = next;
    res.sup_residuals.push_back(residual);
    res.sweeps = sweep + 1;
    if (residual < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double monte_carlo_violation_value(const FiniteSafetyMdp& mdp, int start,
                                   double gamma_safe, int episodes, int horizon,
                                   Rng& rng) {
  mdp.validate();
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    int s = start;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      if (mdp.violating[s] != 0.0) {
        total += discount;  // violation absorbs the episode
        break;
      }
      if (mdp.transitions[s].empty()) break;  // safe-absorbing
      double u = rng.uniform();
      int next = mdp.transitions[s].back().next;
      for (const auto& tr : mdp.transitions[s]) {
        if (u < tr.prob) {
          next = tr.next;
          break;
        }
        u -= tr.prob;
      }
      s = next;
      discount *= gamma_safe;
    }
  }
  return total / static_cast<double>(episodes);
}

SafetyCritic::SafetyCritic(int feature_dim, const std::vector<int>& hidden, Rng& rng)
    : feature_dim_(feature_dim) {
  if (feature_dim <= 0)
    throw std::invalid_argument("safety critic: feature_dim must be positive");
  std::vector<int> widths;
  widths.push_back(feature_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  body_ = net::make_mlp<float>(widths, rng, "safety.body");
  body_->add(std::make_unique<net::Sigmoid<float>>());
  tool_ = net::make_mlp<float>(widths, rng, "safety.tool");
  tool_->add(std::make_unique<net::Sigmoid<float>>());
}

namespace {

double head_value(net::Sequential<float>& head, const std::vector<float>& features,
                  int feature_dim) {
  if (static_cast<int>(features.size()) != feature_dim)
    throw std::invalid_argument("safety critic: feature size mismatch");
  net::Tensor<float> x({feature_dim});
  x.values = features;
  return static_cast<double>(head.forward(x).values[0]);
}

}  // namespace

double SafetyCritic::value_body(const std::vector<float>& features) {
  return head_value(*body_, features, feature_dim_);
}

double SafetyCritic::value_tool(const std::vector<float>& features) {
  return head_value(*tool_, features, feature_dim_);
}

std::vector<net::ParamRef<float>> SafetyCritic::params() {
  auto out = body_->params();
  for (auto& p : tool_->params()) out.push_back(p);
  return out;
}

FitStats fit_safety_critic(SafetyCritic& critic, const std::vector<SafetySample>& data,
                           const FitOptions& opts) {
  if (data.empty())
    throw std::invalid_argument("fit_safety_critic: empty dataset");
  if (opts.gamma_safe < 0.0 || opts.gamma_safe >= 1.0)
    throw std::invalid_argument("fit_safety_critic: gamma_safe must be in [0,1)");

  const int n = static_cast<int>(data.size());
  const int dim = critic.feature_dim();
  for (const auto& s : data)
    if (static_cast<int>(s.features.size()) != dim ||
        static_cast<int>(s.next_features.size()) != dim)
      throw std::invalid_argument("fit_safety_critic: feature size mismatch");

  net::Adam<float> adam(critic.params(), opts.lr);
  Rng rng(opts.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  FitStats stats;
  std::vector<double> target_body(n), target_tool(n);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Refresh targets against the current (frozen) heads once per epoch.
    for (int i = 0; i < n; ++i) {
      const auto& s = data[i];
      const double vb = s.terminal ? 0.0 : critic.value_body(s.next_features);
      const double vt = s.terminal ? 0.0 : critic.value_tool(s.next_features);
      target_body[i] = bellman_target(s.c_body, vb, opts.gamma_safe);
      target_tool[i] = bellman_target(s.c_tool, vt, opts.gamma_safe);
    }

    // Fisher-Yates with our own generator for reproducible shuffles.
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    double loss_sum = 0.0;
    int count = 0;
    for (int base = 0; base < n; base += opts.batch_size) {
      const int end = std::min(base + opts.batch_size, n);
      adam.zero_grad();
      for (int k = base; k < end; ++k) {
        const auto& s = data[order[k]];
        net::Tensor<float> x({dim});
        x.values = s.features;

        auto train_head = [&](net::Sequential<float>& head, double target) {
          auto y = head.forward(x);
          const double pred = static_cast<double>(y.values[0]);
          const double err = pred - target;
          loss_sum += err * err;
          net::Tensor<float> g({1});
          g.values[0] = static_cast<float>(2.0 * err / (end - base));
          head.backward(g);
        };
        train_head(critic.body_head(), target_body[order[k]]);
        train_head(critic.tool_head(), target_tool[order[k]]);
        count += 2;
      }
      adam.step();
    }
    stats.epoch_loss.push_back(loss_sum / std::max(count, 1));
  }
  return stats;
}

double aggregate(double v_body, double v_tool, Mode mode) {
  if (mode == Mode::kEngage) return v_body;
  return std::max(v_body, v_tool);
}

ControlState switch_decision(double v_max, ControlState state, double threshold,
                             double hysteresis) {
  if (state == ControlState::kNominal) {
    if (v_max > threshold) return ControlState::kReactive;
    return ControlState::kNominal;
  }
  if (v_max < threshold - hysteresis) return ControlState::kNominal;
  return ControlState::kReactive;
}

}  // namespace reflex::safety
