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

#include "reflex/rl/p3o.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace reflex::rl {

void CmdpConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("cmdp: gamma not in [0,1)");
  if (lambda_gae < 0.0 || lambda_gae > 1.0)
    throw std::invalid_argument("cmdp: lambda not in [0,1]");
  for (double eps : cost_limits)
    if (eps < 0.0) throw std::invalid_argument("cmdp: negative cost limit");
  if (clip_ratio <= 0.0) throw std::invalid_argument("cmdp: clip ratio must be positive");
  if (epochs <= 0 || minibatch <= 0 || horizon <= 0 || n_envs <= 0 || n_workers <= 0)
    throw std::invalid_argument("cmdp: sizes must be positive");
}

std::vector<EnvSlot> make_env_slots(
    const std::function<std::unique_ptr<Env>(int)>& factory, int n_envs,
    std::uint64_t seed) {
  std::vector<EnvSlot> slots(static_cast<std::size_t>(n_envs));
  for (int e = 0; e < n_envs; ++e) {
    slots[e].env = factory(e);
    slots[e].base_seed = Rng::derive(seed, 100 + static_cast<std::uint64_t>(e)).next_u64();
    slots[e].action_rng = Rng::derive(seed, 5000 + static_cast<std::uint64_t>(e));
  }
  return slots;
}

namespace {

std::unique_ptr<ActorCritic> clone_policy(const ActorCritic& policy,
                                          const std::vector<net::CheckpointEntry>& snap) {
  Rng rng(0);
  auto clone = std::make_unique<ActorCritic>(policy.config(), rng);
  clone->restore(snap);
  return clone;
}

// Runs the segment for slots [begin, end), writing into disjoint batch rows.
void run_segment(ActorCritic& pol, std::vector<EnvSlot>& slots, int begin, int end,
                 const CmdpConfig& cfg, RolloutBatch& out, std::vector<int>& ended,
                 std::vector<int>& succeeded) {
  const int h = cfg.horizon;
  const int na = out.n_actions;
  for (int e = begin; e < end; ++e) {
    EnvSlot& slot = slots[e];
    for (int t = 0; t < h; ++t) {
      const int row = e * h + t;
      if (slot.fresh) {
        const std::uint64_t ep_seed =
            Rng::derive(slot.base_seed, slot.episode).next_u64();
        slot.obs = slot.env->reset(ep_seed);
        slot.fresh = false;
        out.episode_start[static_cast<std::size_t>(row)] = 1;
      }

      out.values[row] = pol.value(slot.obs);
      for (int i = 0; i < kNumConstraints; ++i)
        out.cost_values[i][row] = pol.cost_value(i, slot.obs);

      const std::vector<double> mean = pol.policy_mean(slot.obs);
      const std::vector<double> log_std = pol.log_std();
      const std::vector<double> action =
          net::DiagGaussian::sample(mean, log_std, slot.action_rng);
      out.logp[row] = net::DiagGaussian::log_prob(action, mean, log_std);

      std::copy(slot.obs.begin(), slot.obs.end(),
                out.obs.begin() + static_cast<std::size_t>(row) * out.obs_dim);
      std::copy(action.begin(), action.end(),
                out.actions.begin() + static_cast<std::size_t>(row) * na);

      StepResult res = slot.env->step(action);
      out.rewards[row] = res.reward;
      for (int i = 0; i < kNumConstraints; ++i) out.costs[i][row] = res.costs[i];

      if (res.truncated) {
        // Fold the value of the pre-reset state into the final transition so
        // downstream GAE can treat truncation as termination.
        out.rewards[row] += cfg.gamma * pol.value(res.obs);
        for (int i = 0; i < kNumConstraints; ++i)
          out.costs[i][row] += cfg.gamma * pol.cost_value(i, res.obs);
      }

      const bool done = res.terminal || res.truncated;
      out.dones[row] = done ? 1.0 : 0.0;
      slot.obs = std::move(res.obs);
      if (done) {
        ++ended[e];
        if (slot.env->success()) ++succeeded[e];
        ++slot.episode;
        slot.fresh = true;
      }
    }

    if (slot.fresh) {
      out.bootstrap_value[e] = 0.0;
      for (int i = 0; i < kNumConstraints; ++i) out.bootstrap_cost[i][e] = 0.0;
    } else {
      out.bootstrap_value[e] = pol.value(slot.obs);
      for (int i = 0; i < kNumConstraints; ++i)
        out.bootstrap_cost[i][e] = pol.cost_value(i, slot.obs);
    }
  }
}

}  // namespace

RolloutBatch collect_rollouts(ActorCritic& policy, std::vector<EnvSlot>& slots,
                              const CmdpConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(slots.size()) != cfg.n_envs)
    throw std::invalid_argument("collect: slot count != n_envs");

  RolloutBatch batch;
  batch.n_envs = cfg.n_envs;
  batch.horizon = cfg.horizon;
  batch.obs_dim = slots[0].env->obs_dim();
  batch.n_actions = slots[0].env->n_actions();
  const std::size_t n = static_cast<std::size_t>(batch.size());
  batch.obs.resize(n * batch.obs_dim);
  batch.actions.resize(n * batch.n_actions);
  batch.logp.resize(n);
  batch.rewards.resize(n);
  batch.dones.resize(n);
  batch.values.resize(n);
  batch.episode_start.assign(n, 0);
  batch.bootstrap_value.resize(slots.size());
  for (int i = 0; i < kNumConstraints; ++i) {
    batch.costs[i].resize(n);
    batch.cost_values[i].resize(n);
    batch.bootstrap_cost[i].resize(slots.size());
  }

  std::vector<int> ended(slots.size(), 0);
  std::vector<int> succeeded(slots.size(), 0);

  const int workers = std::min(cfg.n_workers, cfg.n_envs);
  if (workers <= 1) {
    run_segment(policy, slots, 0, cfg.n_envs, cfg, batch, ended, succeeded);
  } else {
    const std::vector<net::CheckpointEntry> snap = policy.snapshot();
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int per = (cfg.n_envs + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * per;
      const int end = std::min(cfg.n_envs, begin + per);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        auto local = clone_policy(policy, snap);
        run_segment(*local, slots, begin, end, cfg, batch, ended, succeeded);
      });
    }
    for (auto& th : pool) th.join();
  }

  batch.episodes_ended = std::accumulate(ended.begin(), ended.end(), 0);
  batch.episodes_succeeded = std::accumulate(succeeded.begin(), succeeded.end(), 0);
  return batch;
}

AdvantageSet compute_advantages(const RolloutBatch& batch, const CmdpConfig& cfg) {
  const int h = batch.horizon;
  const std::size_t n = static_cast<std::size_t>(batch.size());
  AdvantageSet out;
  out.adv_r.resize(n);
  out.ret_r.resize(n);
  for (int i = 0; i < kNumConstraints; ++i) {
    out.adv_c[i].resize(n);
    out.ret_c[i].resize(n);
  }

  std::vector<double> seg_r(h), seg_v(h + 1);
  std::vector<std::uint8_t> seg_d(h);
  for (int e = 0; e < batch.n_envs; ++e) {
    const int base = e * h;
    for (int t = 0; t < h; ++t)
      seg_d[t] = batch.dones[base + t] != 0.0 ? 1 : 0;

    std::copy_n(batch.rewards.begin() + base, h, seg_r.begin());
    std::copy_n(batch.values.begin() + base, h, seg_v.begin());
    seg_v[h] = batch.bootstrap_value[e];
    GaeResult g = gae(seg_r, seg_v, seg_d, cfg.gamma, cfg.lambda_gae);
    std::copy(g.advantages.begin(), g.advantages.end(), out.adv_r.begin() + base);
    std::copy(g.returns.begin(), g.returns.end(), out.ret_r.begin() + base);

    for (int i = 0; i < kNumConstraints; ++i) {
      std::copy_n(batch.costs[i].begin() + base, h, seg_r.begin());
      std::copy_n(batch.cost_values[i].begin() + base, h, seg_v.begin());
      seg_v[h] = batch.bootstrap_cost[i][e];
      GaeResult gc = gae(seg_r, seg_v, seg_d, cfg.gamma, cfg.lambda_gae);
      std::copy(gc.advantages.begin(), gc.advantages.end(), out.adv_c[i].begin() + base);
      std::copy(gc.returns.begin(), gc.returns.end(), out.ret_c[i].begin() + base);
    }
  }

  // Normalize reward advantages only; cost advantage signs feed the hinge.
  double mean = 0.0;
  for (double a : out.adv_r) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : out.adv_r) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n)) + 1e-8;
  for (double& a : out.adv_r) a = (a - mean) / sd;

  // Empirical discounted cost returns, lambda = 1, bootstrapped at segment
  // end like the rewards.
  for (int i = 0; i < kNumConstraints; ++i) {
    std::vector<double> disc(n);
    for (int e = 0; e < batch.n_envs; ++e) {
      double run = batch.bootstrap_cost[i][e];
      for (int t = h - 1; t >= 0; --t) {
        const int row = e * h + t;
        run = batch.costs[i][row] + cfg.gamma * (1.0 - batch.dones[row]) * run;
        disc[row] = run;
      }
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (batch.episode_start[r]) {
        sum += disc[r];
        ++count;
      }
    }
    if (count == 0) {
      for (double d : disc) sum += d;
      count = static_cast<int>(n);
    }
    out.jc[i] = sum / count;
  }
  return out;
}

P3oStats p3o_update(ActorCritic& ac, net::Adam<float>& opt, const RolloutBatch& batch,
                    const CmdpConfig& cfg, Rng& shuffle_rng) {
  cfg.validate();
  const AdvantageSet adv = compute_advantages(batch, cfg);
  const int n = batch.size();
  const auto params = ac.params();
  const std::vector<net::CheckpointEntry> rollback = ac.snapshot();

  P3oStats stats;
  stats.jc = adv.jc;
  stats.episodes = batch.episodes_ended;
  stats.successes = batch.episodes_succeeded;
  for (double r : batch.rewards) stats.mean_reward += r;
  stats.mean_reward /= n;

  const double clip_lo = 1.0 - cfg.clip_ratio;
  const double clip_hi = 1.0 + cfg.clip_ratio;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<float> obs(static_cast<std::size_t>(batch.obs_dim));
  std::vector<double> action(static_cast<std::size_t>(batch.n_actions));
  std::vector<double> ratios;
  std::vector<double> grad_mean(static_cast<std::size_t>(batch.n_actions));
  std::vector<double> grad_log_std(static_cast<std::size_t>(batch.n_actions));

  double policy_loss_acc = 0.0, value_loss_acc = 0.0, entropy_acc = 0.0;
  int loss_terms = 0;
  bool first_minibatch = true;

  auto load_row = [&](int row) {
    const std::size_t r = static_cast<std::size_t>(row);
    std::copy_n(batch.obs.begin() + r * batch.obs_dim, batch.obs_dim, obs.begin());
    std::copy_n(batch.actions.begin() + r * batch.n_actions, batch.n_actions,
                action.begin());
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the trainer rng keeps runs reproducible.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[i], order[j]);
    }

    for (int start = 0; start < n; start += cfg.minibatch) {
      const int mb = std::min(cfg.minibatch, n - start);

      // Pass 1: ratios and minibatch surrogate means decide the penalty
      // gates before any gradient flows.
      ratios.assign(static_cast<std::size_t>(mb), 0.0);
      double reward_surrogate = 0.0;
      std::array<double, kNumConstraints> cost_surrogate{};
      for (int k = 0; k < mb; ++k) {
        const int row = order[static_cast<std::size_t>(start + k)];
        load_row(row);
        const std::vector<double> mean = ac.policy_mean(obs);
        const double lp = net::DiagGaussian::log_prob(action, mean, ac.log_std());
        const double ratio = std::exp(lp - batch.logp[row]);
        ratios[static_cast<std::size_t>(k)] = ratio;
        const double a_r = adv.adv_r[row];
        reward_surrogate +=
            std::min(ratio * a_r, std::clamp(ratio, clip_lo, clip_hi) * a_r);
        for (int i = 0; i < kNumConstraints; ++i) {
          const double a_c = adv.adv_c[i][row];
          cost_surrogate[i] +=
              std::max(ratio * a_c, std::clamp(ratio, clip_lo, clip_hi) * a_c);
        }
      }
      reward_surrogate /= mb;
      for (double& s : cost_surrogate) s /= mb;

      if (first_minibatch) {
        for (double r : ratios)
          stats.ratio_error = std::max(stats.ratio_error, std::abs(r - 1.0));
        if (stats.ratio_error > 1e-6)
          throw std::logic_error("p3o: behavior ratio != 1 at first epoch start");
        first_minibatch = false;
      }

      std::array<bool, kNumConstraints> gate{};
      double penalty = 0.0;
      for (int i = 0; i < kNumConstraints; ++i) {
        const double hinge = cost_surrogate[i] + adv.jc[i] - cfg.cost_limits[i];
        gate[i] = cfg.kappa[i] > 0.0 && hinge > 0.0;
        if (gate[i]) {
          penalty += cfg.kappa[i] * hinge;
          stats.penalty_active[i] = true;
        }
      }

      const double entropy = net::DiagGaussian::entropy(ac.log_std());
      const double mb_policy_loss =
          -reward_surrogate + penalty - cfg.entropy_coef * entropy;

      // Pass 2: gradients, each head forward immediately followed by its
      // backward so the shared trunk cache stays coherent.
      double mb_value_loss = 0.0;
      for (int k = 0; k < mb; ++k) {
        const int row = order[static_cast<std::size_t>(start + k)];
        load_row(row);

        const double v = ac.value(obs);
        mb_value_loss += (v - adv.ret_r[row]) * (v - adv.ret_r[row]);
        ac.backward_value(cfg.value_coef * 2.0 * (v - adv.ret_r[row]) / mb);

        for (int i = 0; i < kNumConstraints; ++i) {
          const double vc = ac.cost_value(i, obs);
          mb_value_loss += (vc - adv.ret_c[i][row]) * (vc - adv.ret_c[i][row]);
          ac.backward_cost_value(i, cfg.value_coef * 2.0 * (vc - adv.ret_c[i][row]) / mb);
        }

        const std::vector<double> mean = ac.policy_mean(obs);
        const std::vector<double> log_std = ac.log_std();
        const double ratio = ratios[static_cast<std::size_t>(k)];

        double coeff = 0.0;
        const double a_r = adv.adv_r[row];
        if (ratio * a_r <= std::clamp(ratio, clip_lo, clip_hi) * a_r)
          coeff -= a_r * ratio;
        for (int i = 0; i < kNumConstraints; ++i) {
          if (!gate[i]) continue;
          const double a_c = adv.adv_c[i][row];
          if (ratio * a_c >= std::clamp(ratio, clip_lo, clip_hi) * a_c)
            coeff += cfg.kappa[i] * a_c * ratio;
        }
        coeff /= mb;

        std::fill(grad_mean.begin(), grad_mean.end(), 0.0);
        std::fill(grad_log_std.begin(), grad_log_std.end(), 0.0);
        net::DiagGaussian::log_prob_grad(action, mean, log_std, coeff, grad_mean,
                                         grad_log_std);
        if (cfg.entropy_coef > 0.0)
          for (double& g : grad_log_std) g -= cfg.entropy_coef / mb;
        ac.backward_policy(grad_mean, grad_log_std);
      }
      mb_value_loss /= mb;

      if (!std::isfinite(mb_policy_loss) || !std::isfinite(mb_value_loss)) {
        ac.restore(rollback);
        opt.zero_grad();
        stats.aborted = true;
        return stats;
      }

      stats.grad_norm = net::clip_grad_norm(params, cfg.max_grad_norm);
      opt.step();
      opt.zero_grad();

      policy_loss_acc += mb_policy_loss;
      value_loss_acc += mb_value_loss;
      entropy_acc += entropy;
      ++loss_terms;
    }
  }

  stats.policy_loss = policy_loss_acc / loss_terms;
  stats.value_loss = value_loss_acc / loss_terms;
  stats.entropy = entropy_acc / loss_terms;
  return stats;
}

TrainSummary train_p3o(ActorCritic& ac,
                       const std::function<std::unique_ptr<Env>(int)>& env_factory,
                       const TrainOptions& opts) {
  opts.cmdp.validate();
  std::vector<EnvSlot> slots = make_env_slots(env_factory, opts.cmdp.n_envs, opts.seed);
  net::Adam<float> opt(ac.params(), opts.cmdp.lr);
  Rng shuffle_rng = Rng::derive(opts.seed, 31);

  std::ofstream csv;
  if (!opts.progress_csv.empty()) {
    csv.open(opts.progress_csv);
    if (!csv) throw std::runtime_error("p3o: cannot open " + opts.progress_csv);
    csv << "update,mean_reward,jc0,jc1,jc2,jc3,episodes,successes,success_rate,"
           "policy_loss,value_loss,entropy\n";
  }

  TrainSummary summary;
  for (int u = 0; u < opts.updates; ++u) {
    RolloutBatch batch = collect_rollouts(ac, slots, opts.cmdp);
    const P3oStats stats = p3o_update(ac, opt, batch, opts.cmdp, shuffle_rng);

    summary.updates_done = u + 1;
    summary.final_mean_reward = stats.mean_reward;
    summary.final_jc = stats.jc;
    summary.episodes += stats.episodes;
    summary.successes += stats.successes;

    const double sr =
        stats.episodes > 0 ? static_cast<double>(stats.successes) / stats.episodes : 0.0;
    if (csv.is_open()) {
      csv << u << ',' << stats.mean_reward << ',' << stats.jc[0] << ',' << stats.jc[1]
          << ',' << stats.jc[2] << ',' << stats.jc[3] << ',' << stats.episodes << ','
          << stats.successes << ',' << sr << ',' << stats.policy_loss << ','
          << stats.value_loss << ',' << stats.entropy << '\n';
      csv.flush();
    }
    if (opts.verbose) {
      std::cerr << "update " << u << " reward " << stats.mean_reward << " jc0 "
                << stats.jc[0] << " success " << sr
                << (stats.aborted ? " [aborted]" : "") << '\n';
    }
    if (!opts.checkpoint_path.empty() && opts.checkpoint_every > 0 &&
        (u + 1) % opts.checkpoint_every == 0) {
      net::save_checkpoint(opts.checkpoint_path, ac.snapshot());
    }
  }
  if (!opts.checkpoint_path.empty())
    net::save_checkpoint(opts.checkpoint_path, ac.snapshot());
  return summary;
}

EvalResult evaluate_policy(Env& env, ActorCritic& policy, int episodes,
                           std::uint64_t seed, double gamma) {
  EvalResult res;
  long steps = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<float> obs = env.reset(Rng::derive(seed, static_cast<std::uint64_t>(ep)).next_u64());
    double discount = 1.0;
    while (true) {
      const std::vector<double> action = policy.policy_mean(obs);
      StepResult sr = env.step(action);
      res.mean_reward += sr.reward;
      ++steps;
      for (int i = 0; i < kNumConstraints; ++i)
        res.mean_discounted_cost[i] += discount * sr.costs[i];
      discount *= gamma;
      obs = std::move(sr.obs);
      if (sr.terminal || sr.truncated) break;
    }
    ++res.episodes;
    if (env.success()) ++res.successes;
  }
  if (steps > 0) res.mean_reward /= static_cast<double>(steps);
  for (double& c : res.mean_discounted_cost) c /= std::max(1, res.episodes);
  return res;
}

}  // namespace reflex::rl
