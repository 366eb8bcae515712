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

// Command-line front end: training, evaluation, and the benchmark suite as
// pure functions of (config JSON, seed), writing artifacts under --out.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "reflex/bench/bench.hpp"
#include "reflex/bench/config.hpp"
#include "reflex/bench/io.hpp"
#include "reflex/bench/session.hpp"
#include "reflex/core/csv.hpp"
#include "reflex/netcore/checkpoint.hpp"
#include "reflex/rl/p3o.hpp"
#include "reflex/rl/pretrain.hpp"

namespace {

using reflex::bench::AppConfig;

AppConfig load_or_default(const std::string& path) {
  if (path.empty()) return reflex::bench::make_desk_config();
  return reflex::bench::load_config(path);
}

void ensure_out(const std::string& out) {
  if (out.empty()) throw CLI::ValidationError("--out", "an output directory is required");
  std::filesystem::create_directories(out);
}

std::shared_ptr<const std::vector<reflex::net::CheckpointEntry>> load_weights(
    const std::string& path, const char* what) {
  if (path.empty()) {
    throw std::runtime_error(std::string("missing checkpoint path for ") + what);
  }
  return std::make_shared<const std::vector<reflex::net::CheckpointEntry>>(
      reflex::net::load_checkpoint(path));
}

int cmd_config(const std::string& chain, const std::string& out) {
  AppConfig cfg = chain == "arm6" ? reflex::bench::make_arm6_config()
                                  : reflex::bench::make_desk_config();
  if (out.empty()) {
    std::fputs(reflex::bench::config_to_json(cfg).c_str(), stdout);
  } else {
    reflex::bench::save_config(out, cfg);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

int cmd_train_encoder(const AppConfig& cfg, std::uint64_t seed,
                      const std::string& out, int episodes, int ae_epochs) {
  ensure_out(out);
  reflex::rl::PretrainConfig pc;
  pc.env = cfg.env;
  pc.env.obs_mode = reflex::rl::ObsMode::kLatent;
  pc.seed = seed;
  if (episodes > 0) pc.episodes = episodes;
  if (ae_epochs > 0) pc.autoenc.epochs = ae_epochs;
  const reflex::rl::PretrainResult res = reflex::rl::pretrain_encoder(pc);

  const std::string ckpt = out + "/perception.ckpt";
  reflex::net::save_checkpoint(ckpt, res.weights);
  reflex::CsvWriter losses({"epoch", "autoenc_bce", "safety_mse"});
  const std::size_t rows =
      std::max(res.autoenc_losses.size(), res.safety_losses.size());
  for (std::size_t i = 0; i < rows; ++i) {
    losses.col(i)
        .col(i < res.autoenc_losses.size() ? res.autoenc_losses[i] : 0.0)
        .col(i < res.safety_losses.size() ? res.safety_losses[i] : 0.0);
    losses.end_row();
  }
  losses.save(out + "/train_encoder.csv");
  std::printf("pretrain: %d recon frames, %d safety pairs, IoU %.4f\n",
              res.recon_samples, res.safety_samples, res.train_iou);
  std::printf("wrote %s\n", ckpt.c_str());
  return 0;
}

int cmd_train_policy(const AppConfig& cfg, std::uint64_t seed,
                     const std::string& out, const std::string& perception_path,
                     int updates, bool verbose) {
  ensure_out(out);
  const bool latent = cfg.env.obs_mode == reflex::rl::ObsMode::kLatent;
  std::shared_ptr<const std::vector<reflex::net::CheckpointEntry>> perception;
  if (latent) {
    const std::string path = !perception_path.empty()
                                 ? perception_path
                                 : cfg.bench.perception_checkpoint;
    perception = load_weights(path, "the perception encoder");
  }
  const reflex::rl::CmdpEnvConfig env_cfg = cfg.env;
  auto factory = [env_cfg, perception](int) {
    auto env = std::make_unique<reflex::rl::CmdpEnv>(env_cfg);
    if (env_cfg.obs_mode == reflex::rl::ObsMode::kLatent) {
      env->set_perception(perception);
    }
    return std::unique_ptr<reflex::rl::Env>(std::move(env));
  };

  reflex::Rng ac_rng = reflex::Rng::derive(seed, 88);
  reflex::rl::ActorCritic ac(reflex::bench::make_policy_config(cfg), ac_rng);
  reflex::rl::TrainOptions opts;
  opts.cmdp = cfg.rl;
  opts.updates = updates;
  opts.seed = seed;
  opts.progress_csv = out + "/train_policy.csv";
  opts.checkpoint_path = out + "/policy.ckpt";
  opts.verbose = verbose;
  const reflex::rl::TrainSummary sum = reflex::rl::train_p3o(ac, factory, opts);
  std::printf(
      "trained %d updates: mean reward %.4f, episodes %d, success rate %.1f%%\n",
      sum.updates_done, sum.final_mean_reward, sum.episodes,
      sum.episodes > 0 ? 100.0 * sum.successes / sum.episodes : 0.0);
  std::printf("wrote %s\n", opts.checkpoint_path.c_str());
  return 0;
}

int cmd_eval(const AppConfig& cfg, std::uint64_t seed,
             const std::string& policy_path, const std::string& perception_path,
             int episodes) {
  AppConfig ecfg = cfg;
  if (!policy_path.empty()) ecfg.bench.policy_checkpoint = policy_path;
  if (!perception_path.empty()) {
    ecfg.bench.perception_checkpoint = perception_path;
  }
  const bool latent = ecfg.env.obs_mode == reflex::rl::ObsMode::kLatent;
  std::shared_ptr<const std::vector<reflex::net::CheckpointEntry>> perception;
  if (latent) {
    perception = load_weights(ecfg.bench.perception_checkpoint,
                              "the perception encoder");
  }
  reflex::rl::CmdpEnv env(ecfg.env);
  if (latent) env.set_perception(perception);

  reflex::Rng ac_rng(0);
  reflex::rl::ActorCritic ac(reflex::bench::make_policy_config(ecfg), ac_rng);
  ac.restore(*load_weights(ecfg.bench.policy_checkpoint, "the policy"));

  const reflex::bench::EpisodeEvalStats stats =
      reflex::bench::evaluate_env_episodes(env, ac, episodes, seed);
  std::printf(
      "episodes %d: success %.1f%% (%d), collisions %d, tool violations %d, "
      "mean step reward %.4f\n",
      stats.episodes, stats.success_pct(), stats.successes, stats.collisions,
      stats.tool_violations, stats.mean_reward);
  return 0;
}

std::vector<std::pair<reflex::bench::Method, reflex::bench::PerceptionSource>>
parse_entries(const std::string& spec, const AppConfig& cfg) {
  const bool has_assets = !cfg.bench.policy_checkpoint.empty() &&
                          !cfg.bench.perception_checkpoint.empty();
  if (spec.empty()) {
    return reflex::bench::default_benchmark_entries(has_assets);
  }
  std::vector<std::pair<reflex::bench::Method, reflex::bench::PerceptionSource>>
      entries;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string item = spec.substr(pos, comma - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error("--entries items look like method:perception");
    }
    entries.emplace_back(
        reflex::bench::method_from_name(item.substr(0, colon)),
        reflex::bench::perception_from_name(item.substr(colon + 1)));
    pos = comma + 1;
  }
  return entries;
}

int cmd_bench_dynamic(const AppConfig& cfg, std::uint64_t seed,
                      const std::string& out, const std::string& entry_spec) {
  ensure_out(out);
  const auto entries = parse_entries(entry_spec, cfg);
  bool needs_rl = false;
  for (const auto& e : entries) {
    needs_rl = needs_rl || e.first == reflex::bench::Method::kHybridRl;
  }
  reflex::bench::PolicyAssets assets;
  if (needs_rl) assets = reflex::bench::load_policy_assets(cfg.bench);
  const auto cells = reflex::bench::run_dynamic_benchmark(
      cfg, entries, needs_rl ? &assets : nullptr, seed, out);
  std::printf("%-6s %-8s %-6s %9s %10s %9s %9s\n", "method", "percep", "speed",
              "success%", "collision%", "timeout", "toolviol");
  for (const auto& cell : cells) {
    std::printf("%-6s %-8s %-6.2f %9.1f %10.1f %9d %9d\n",
                reflex::bench::method_name(cell.method),
                reflex::bench::perception_name(cell.perception),
                cell.obstacle_speed, cell.success_pct(), cell.collision_pct(),
                cell.timeouts, cell.tool_violations);
  }
  return 0;
}

int cmd_bench_sweep(const AppConfig& cfg, std::uint64_t seed,
                    const std::string& out) {
  ensure_out(out);
  const auto results = reflex::bench::run_tracking_sweep(cfg, seed, out);
  for (const auto& res : results) {
    std::printf(
        "tool %.2f m: %d avoidance cells, area %.3f m^2, free error %.6f mm\n",
        res.tool_size, res.active_cells, res.high_error_area_m2,
        res.free_mean_error_mm);
  }
  return 0;
}

int cmd_bench_memory(const AppConfig& cfg, const std::string& out) {
  ensure_out(out);
  const auto res = reflex::bench::run_memory_demo(cfg, out);
  std::printf(
      "tracked %d cells: occluded min prob %.3f over %d steps, "
      "never-observed max dev %.3f, post-removal max prob %.3f\n",
      res.tracked_cells, res.occluded_min_prob, res.occlusion_steps,
      res.never_observed_max_dev, res.post_removal_max_prob);
  return 0;
}

int cmd_bench_ablation(const AppConfig& cfg, std::uint64_t seed,
                       const std::string& out, const std::string& variant_spec) {
  ensure_out(out);
  std::vector<std::string> variants;
  if (variant_spec.empty()) {
    variants = reflex::bench::ablation_variants();
  } else {
    std::size_t pos = 0;
    while (pos < variant_spec.size()) {
      std::size_t comma = variant_spec.find(',', pos);
      if (comma == std::string::npos) comma = variant_spec.size();
      variants.push_back(variant_spec.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }
  const auto rows = reflex::bench::run_ablation(cfg, variants, seed, out);
  std::printf("%-16s %9s %10s %9s %8s\n", "variant", "success%", "collision%",
              "toolviol%", "IoU");
  for (const auto& row : rows) {
    std::printf("%-16s %9.1f %10.1f %9.1f %8.3f\n", row.variant.c_str(),
                row.success_pct, row.collision_pct, row.tool_violation_pct,
                row.pretrain_iou);
  }
  return 0;
}

int cmd_profile(AppConfig cfg, std::uint64_t seed, const std::string& out,
                int steps) {
  if (steps > 0) cfg.bench.profile_steps = steps;
  const auto profile = reflex::bench::profile_latency(cfg, seed);
  auto line = [](const char* name, const reflex::bench::StageStats& s) {
    std::printf("%-10s mean %8.3f ms  sd %8.3f  p50 %8.3f  max %8.3f\n", name,
                s.mean_ms, s.sd_ms, s.p50_ms, s.max_ms);
  };
  std::printf("full pipeline, %d steps:\n", profile.steps);
  line("voxelize", profile.voxelize);
  line("esdf", profile.esdf);
  line("inference", profile.inference);
  line("control", profile.control);
  line("full", profile.full_step);
  std::printf("mppi planner, %d steps at %d samples:\n", profile.mppi_steps,
              profile.mppi_samples);
  line("mppi", profile.mppi);
  if (!out.empty()) {
    reflex::bench::write_profile(out, profile);
    std::printf("wrote %s/profile.json\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic collision-avoidance toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // --config/--seed/--out may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--config", config_path, "config JSON (default: desk preset)")
      ->expected(1);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");

  auto* config_cmd = app.add_subcommand("config", "print or write a preset config");
  std::string chain = "planar3_desk";
  config_cmd->add_option("--chain", chain, "planar3_desk or arm6");

  auto* train = app.add_subcommand("train", "train networks");
  train->require_subcommand(1);
  auto* train_encoder = train->add_subcommand("encoder", "pretrain perception");
  int pre_episodes = 0;
  int pre_ae_epochs = 0;
  train_encoder->add_option("--episodes", pre_episodes, "override rollout episodes");
  train_encoder->add_option("--ae-epochs", pre_ae_epochs, "override autoencoder epochs");
  auto* train_policy = train->add_subcommand("policy", "constrained policy optimization");
  std::string perception_path;
  int updates = 200;
  bool verbose = false;
  train_policy->add_option("--perception", perception_path, "encoder checkpoint");
  train_policy->add_option("--updates", updates, "optimizer updates");
  train_policy->add_flag("--verbose", verbose, "per-update progress on stderr");

  auto* eval = app.add_subcommand("eval", "greedy policy evaluation");
  std::string policy_path;
  std::string eval_perception_path;
  int eval_episodes = 20;
  eval->add_option("--policy", policy_path, "policy checkpoint");
  eval->add_option("--perception", eval_perception_path, "encoder checkpoint");
  eval->add_option("--episodes", eval_episodes, "episode count");

  auto* bench = app.add_subcommand("bench", "benchmark suite");
  bench->require_subcommand(1);
  auto* bench_dynamic = bench->add_subcommand("dynamic", "crossing-encounter table");
  std::string entry_spec;
  bench_dynamic->add_option("--entries", entry_spec,
                            "comma list of method:perception (default: all)");
  auto* bench_sweep = bench->add_subcommand("sweep", "static tracking sweep");
  auto* bench_memory = bench->add_subcommand("memory", "occlusion retention demo");
  auto* bench_ablation = bench->add_subcommand("ablation", "perception ablation table");
  std::string variant_spec;
  bench_ablation->add_option("--variants", variant_spec,
                             "comma list (default: all four)");

  auto* profile = app.add_subcommand("profile", "per-stage latency");
  int profile_steps = 0;
  profile->add_option("--steps", profile_steps, "override bench.profile_steps");

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_cmd->parsed()) return cmd_config(chain, out);
    const AppConfig cfg = load_or_default(config_path);
    if (train_encoder->parsed()) {
      return cmd_train_encoder(cfg, seed, out, pre_episodes, pre_ae_epochs);
    }
    if (train_policy->parsed()) {
      return cmd_train_policy(cfg, seed, out, perception_path, updates, verbose);
    }
    if (eval->parsed()) {
      return cmd_eval(cfg, seed, policy_path, eval_perception_path, eval_episodes);
    }
    if (bench_dynamic->parsed()) {
      return cmd_bench_dynamic(cfg, seed, out, entry_spec);
    }
    if (bench_sweep->parsed()) return cmd_bench_sweep(cfg, seed, out);
    if (bench_memory->parsed()) return cmd_bench_memory(cfg, out);
    if (bench_ablation->parsed()) {
      return cmd_bench_ablation(cfg, seed, out, variant_spec);
    }
    if (profile->parsed()) return cmd_profile(cfg, seed, out, profile_steps);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
