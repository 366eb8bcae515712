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

#include "reflex/baselines/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace reflex::baselines {

namespace {
constexpr double kCollisionPenalty = 1e3;  // per colliding step
}

int MppiConfig::steps() const {
  return static_cast<int>(std::lround(horizon_s / dt));
}

void MppiConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("mppi: dt must be positive");
  const int T = steps();
  if (T < 1 || std::abs(T * dt - horizon_s) > 1e-9)
    throw std::invalid_argument("mppi: horizon must be an integral number of steps");
  if (n_samples <= 0) throw std::invalid_argument("mppi: n_samples must be positive");
  if (temperature <= 0.0) throw std::invalid_argument("mppi: temperature must be positive");
  if (sigma_u <= 0.0) throw std::invalid_argument("mppi: sigma_u must be positive");
  if (w_tracking < 0.0 || w_collision < 0.0 || w_smooth < 0.0)
    throw std::invalid_argument("mppi: negative cost weight");
  if (n_workers <= 0) throw std::invalid_argument("mppi: n_workers must be positive");
}

MppiPlan mppi_plan(const kin::SerialChain& chain, const kin::VecX& q,
                   const std::vector<kin::VecX>& nominal, const Pose& target,
                   const ToolRegion& tool, const ClearanceFn& clearance,
                   const MppiConfig& cfg, Rng& rng) {
  cfg.validate();
  const int T = cfg.steps();
  const int K = cfg.n_samples;
  const int n = chain.n_joints;

  std::vector<kin::VecX> base(static_cast<std::size_t>(T), kin::VecX::Zero(n));
  for (int t = 0; t < T && t < static_cast<int>(nominal.size()); ++t) base[t] = nominal[t];

  // All noise drawn up front in (sample, step, joint) order; rollouts may
  // then run on any number of workers without changing the result.
  std::vector<double> noise(static_cast<std::size_t>(K) * T * n);
  for (double& v : noise) v = cfg.sigma_u * rng.normal();
  const auto eps = [&](int k, int t, int j) {
    return noise[(static_cast<std::size_t>(k) * T + t) * n + j];
  };

  std::vector<double> costs(static_cast<std::size_t>(K), 0.0);
  std::vector<std::uint8_t> collided(static_cast<std::size_t>(K), 0);

  const auto rollout = [&](int k) {
    kin::VecX qk = q;
    kin::VecX u(n), prev_u = kin::VecX::Zero(n);
    double cost = 0.0;
    bool hit = false;
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < n; ++j) u[j] = base[t][j] + eps(k, t, j);
      const kin::VecX q_next =
          kin::rate_limit(chain, qk, kin::clamp_to_limits(chain, qk + u), cfg.dt);
      const kin::VecX u_eff = q_next - qk;
      qk = q_next;

      const kin::FkResult fk = kin::forward_kinematics(chain, qk);
      cost += cfg.w_tracking * (fk.ee.position - target.position).squaredNorm();

      const auto clearance_cost = [&](const Vec3& point, double radius) {
        const double d = clearance(point) - radius;
        if (d <= 0.0) {
          hit = true;
          cost += kCollisionPenalty;
        } else if (d < cfg.collision_margin) {
          cost += cfg.w_collision * (cfg.collision_margin - d);
        }
      };
      for (const kin::WorldSphere& s : kin::body_spheres_world(chain, fk))
        clearance_cost(s.center, s.radius);
      if (!tool.empty())
        for (const Vec3& c : tool.corners_world(fk.ee)) clearance_cost(c, 0.0);

      cost += cfg.w_smooth * (u_eff - prev_u).squaredNorm();
      prev_u = u_eff;
    }
    costs[static_cast<std::size_t>(k)] = cost;
    collided[static_cast<std::size_t>(k)] = hit ? 1 : 0;
  };

  const int workers = std::min(cfg.n_workers, K);
  if (workers <= 1) {
    for (int k = 0; k < K; ++k) rollout(k);
  } else {
    std::vector<std::thread> pool;
    const int per = (K + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * per;
      const int end = std::min(K, begin + per);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        for (int k = begin; k < end; ++k) rollout(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  MppiPlan plan;
  plan.sample_costs = costs;
  plan.min_cost = *std::min_element(costs.begin(), costs.end());
  plan.weights.resize(static_cast<std::size_t>(K));
  double wsum = 0.0;
  for (int k = 0; k < K; ++k) {
    plan.weights[k] = std::exp(-(costs[k] - plan.min_cost) / cfg.temperature);
    wsum += plan.weights[k];
    plan.mean_cost += costs[k];
  }
  plan.mean_cost /= K;
  for (int k = 0; k < K; ++k) {
    plan.weights[k] /= wsum;
    plan.expected_cost += plan.weights[k] * costs[k];
  }

  plan.infeasible =
      std::all_of(collided.begin(), collided.end(), [](std::uint8_t c) { return c != 0; });
  plan.controls.assign(static_cast<std::size_t>(T), kin::VecX::Zero(n));
  if (!plan.infeasible) {
    for (int t = 0; t < T; ++t) {
      plan.controls[t] = base[t];
      for (int k = 0; k < K; ++k)
        for (int j = 0; j < n; ++j) plan.controls[t][j] += plan.weights[k] * eps(k, t, j);
    }
  }
  return plan;
}

MppiController::MppiController(const kin::SerialChain& chain, const MppiConfig& cfg,
                               std::uint64_t seed)
    : chain_(chain), cfg_(cfg), rng_(seed) {
  cfg_.validate();
  nominal_.assign(static_cast<std::size_t>(cfg_.steps()), kin::VecX::Zero(chain_.n_joints));
}

void MppiController::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  nominal_.assign(static_cast<std::size_t>(cfg_.steps()), kin::VecX::Zero(chain_.n_joints));
  last_plan_ = MppiPlan{};
}

kin::VecX MppiController::step(const kin::VecX& q, const Pose& target,
                               const ToolRegion& tool, const ClearanceFn& clearance) {
  last_plan_ = mppi_plan(chain_, q, nominal_, target, tool, clearance, cfg_, rng_);
  if (last_plan_.infeasible) {
    nominal_.assign(nominal_.size(), kin::VecX::Zero(chain_.n_joints));
    return q;  // hold in place: every sampled motion predicted a collision
  }
  // Shift the plan by the executed step; pad with a zero tail.
  nominal_.assign(nominal_.size(), kin::VecX::Zero(chain_.n_joints));
  for (std::size_t t = 0; t + 1 < last_plan_.controls.size(); ++t)
    nominal_[t] = last_plan_.controls[t + 1];
  const kin::VecX q_des = kin::clamp_to_limits(chain_, q + last_plan_.controls[0]);
  return kin::rate_limit(chain_, q, q_des, cfg_.dt);
}

}  // namespace reflex::baselines
