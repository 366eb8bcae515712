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

#include "reflex/bench/session.hpp"

#include <limits>
#include <stdexcept>

#include "reflex/baselines/apf.hpp"
#include "reflex/baselines/clearance.hpp"
#include "reflex/baselines/cluster.hpp"
#include "reflex/baselines/mppi.hpp"
#include "reflex/control/controller.hpp"
#include "reflex/kinematics/ik.hpp"
#include "reflex/perception/model.hpp"
#include "reflex/perception/observation.hpp"
#include "reflex/world/esdf.hpp"

namespace reflex::bench {

const char* method_name(Method m) {
  switch (m) {
    case Method::kHybridRl: return "rl";
    case Method::kApf: return "apf";
    case Method::kMppi: return "mppi";
  }
  return "?";
}

const char* perception_name(PerceptionSource p) {
  switch (p) {
    case PerceptionSource::kGroundTruth: return "gt";
    case PerceptionSource::kClusters: return "cluster";
    case PerceptionSource::kEsdf: return "esdf";
    case PerceptionSource::kFused: return "fused";
  }
  return "?";
}

const char* outcome_name(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::kSuccess: return "success";
    case TrialOutcome::kCollision: return "collision";
    case TrialOutcome::kToolViolation: return "tool_violation";
    case TrialOutcome::kTimeout: return "timeout";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "rl") return Method::kHybridRl;
  if (name == "apf") return Method::kApf;
  if (name == "mppi") return Method::kMppi;
  throw std::runtime_error("unknown method '" + name + "'");
}

PerceptionSource perception_from_name(const std::string& name) {
  if (name == "gt") return PerceptionSource::kGroundTruth;
  if (name == "cluster") return PerceptionSource::kClusters;
  if (name == "esdf") return PerceptionSource::kEsdf;
  if (name == "fused") return PerceptionSource::kFused;
  throw std::runtime_error("unknown perception source '" + name + "'");
}

rl::ActorCriticConfig make_policy_config(const AppConfig& cfg) {
  rl::ActorCriticConfig ac;
  ac.n_actions = cfg.env.chain.n_joints;
  ac.hidden = {256, 256};
  const int proprio = control::proprio_dim(cfg.env.chain.n_joints);
  const auto& dims = cfg.env.pcfg.grid_dims;
  if (cfg.env.obs_mode == rl::ObsMode::kLatent) {
    ac.obs_dim = cfg.env.pcfg.latent_dim + proprio;
  } else {
    ac.obs_dim = 3 * dims[0] * dims[1] * dims[2] + proprio;
    ac.conv_trunk = true;
    ac.grid_dims = dims;
    ac.grid_channels = 3;
    ac.trunk_latent = 64;
  }
  return ac;
}

PolicyAssets load_policy_assets(const BenchSettings& bench) {
  if (bench.policy_checkpoint.empty() || bench.perception_checkpoint.empty()) {
    throw std::runtime_error(
        "the learned method needs bench.policy_checkpoint and "
        "bench.perception_checkpoint");
  }
  PolicyAssets assets;
  assets.policy = std::make_shared<const std::vector<net::CheckpointEntry>>(
      net::load_checkpoint(bench.policy_checkpoint));
  assets.perception =
      std::make_shared<const std::vector<net::CheckpointEntry>>(
          net::load_checkpoint(bench.perception_checkpoint));
  return assets;
}

namespace {

Quat yaw_quat(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

/// Targets face outward from the base so a short wrist link stays inside the
/// reachable annulus along the whole sweep.
Pose outward_pose(const Vec3& p) {
  Pose pose;
  pose.position = p;
  pose.orientation = yaw_quat(std::atan2(p.y(), p.x()));
  return pose;
}

}  // namespace

DynamicTrial make_dynamic_trial(const AppConfig& cfg, double obstacle_speed,
                                Rng& rng) {
  const world::ScenarioRanges& r = cfg.env.ranges;
  DynamicTrial trial;
  trial.waypoint_speed = cfg.bench.waypoint_speed;

  const double z_line =
      r.target_z >= 0.0
          ? r.target_z
          : 0.5 * (r.target_z_range.x() + r.target_z_range.y());
  const double x_line =
      0.5 * (r.target_radius_range.x() + r.target_radius_range.y());
  const double y_span = 0.8 * x_line;
  trial.sweep_start = Vec3(x_line, y_span, z_line);
  trial.sweep_end = Vec3(x_line, -y_span, z_line);

  trial.scene.workspace_origin = r.workspace_origin;
  trial.scene.workspace_size = r.workspace_size;
  trial.scene.table_height = r.table_height;

  // Placement and start pose are resampled together until the best IK branch
  // of the start waypoint keeps every body sphere clear of the scene, so no
  // method is born in contact. Redraws advance the same rng stream, which
  // keeps trial geometry a pure function of (seed, speed, trial index).
  constexpr double kMinStartClear = 0.04;
  constexpr int kMaxPlacements = 20;
  kin::IkOptions opts;
  opts.max_iters = 200;
  const kin::SerialChain& chain = cfg.env.chain;
  for (int attempt = 0; attempt < kMaxPlacements; ++attempt) {
    world::ObstacleSpec obs;
    obs.footprint = rng.bernoulli(r.cylinder_prob) ? world::Footprint::kCylinder
                                                   : world::Footprint::kBox;
    if (obstacle_speed <= 0.0) {
      // Parked clutter pokes into the sweep corridor from beyond the line's
      // radius, so the straight path grazes it but a short inward bulge
      // clears it while every body sphere stays at smaller radii. Anything
      // parked at the line's own radius also blocks the forearm, which turns
      // the trial into a reconfiguration problem no reactive method solves.
      obs.size =
          Eigen::Vector2d(rng.uniform(0.06, 0.09), rng.uniform(0.06, 0.09));
      obs.position = Eigen::Vector2d(x_line + rng.uniform(0.04, 0.06),
                                     rng.uniform(-0.08, 0.08));
    } else {
      // Spawns beyond the far end of the sweep and drives across it.
      obs.size =
          Eigen::Vector2d(rng.uniform(0.06, 0.10), rng.uniform(0.06, 0.10));
      obs.position = Eigen::Vector2d(x_line + rng.uniform(-0.02, 0.02),
                                     -(y_span + 0.06));
      const Eigen::Vector2d aim(x_line + rng.uniform(-0.02, 0.02),
                                rng.uniform(-0.03, 0.03));
      obs.velocity = (aim - obs.position).normalized() * obstacle_speed;
    }
    obs.yaw = rng.uniform(-M_PI, M_PI);
    obs.height = std::min(z_line + rng.uniform(0.08, 0.15),
                          r.workspace_origin.z() + r.workspace_size.z());
    trial.scene.obstacles.assign(1, obs);

    // The start waypoint usually has several IK branches (elbow to either
    // side); keep the converged one that starts farthest from the scene.
    double best_clear = -std::numeric_limits<double>::infinity();
    for (double seed_val : {0.0, 0.8, -0.8, 1.6, -1.6}) {
      const kin::IkResult ik =
          kin::solve_ik(chain, kin::VecX::Constant(chain.n_joints, seed_val),
                        outward_pose(trial.sweep_start), opts);
      if (!ik.converged) continue;
      double clear = std::numeric_limits<double>::infinity();
      for (const auto& s : kin::body_spheres_world(chain, ik.q)) {
        clear = std::min(
            clear, world::scene_clearance(trial.scene, s.center) - s.radius);
      }
      if (clear > best_clear) {
        best_clear = clear;
        trial.q0 = ik.q;
      }
    }
    if (best_clear >= kMinStartClear) return trial;
  }
  throw std::runtime_error("dynamic trial: no collision-free start pose");
}

namespace {

struct Adjudication {
  double worst_clearance = std::numeric_limits<double>::infinity();
  bool collision = false;
  bool tool_violation = false;
};

Adjudication adjudicate(const world::Scene& scene,
                        const std::vector<kin::WorldSphere>& spheres,
                        const Pose& ee, const control::Command& cmd) {
  Adjudication adj;
  for (const auto& s : spheres) {
    const double c = world::scene_clearance(scene, s.center) - s.radius;
    adj.worst_clearance = std::min(adj.worst_clearance, c);
  }
  adj.collision = adj.worst_clearance < 0.0;
  if (cmd.mode == Mode::kProtective && !cmd.tool.empty()) {
    for (const Vec3& corner : cmd.tool.corners_world(ee)) {
      if (world::scene_clearance(scene, corner) <= 1e-9) {
        adj.tool_violation = true;
        break;
      }
    }
  }
  return adj;
}

}  // namespace

TrialRecord run_dynamic_trial(const AppConfig& cfg, Method method,
                              PerceptionSource perception,
                              const PolicyAssets* assets,
                              const DynamicTrial& trial, std::uint64_t seed,
                              CsvWriter* telemetry) {
  if ((method == Method::kHybridRl) !=
      (perception == PerceptionSource::kFused)) {
    throw std::runtime_error(
        "the learned method pairs with 'fused' perception only");
  }

  const kin::SerialChain& chain = cfg.env.chain;
  const double dt = cfg.env.dt;
  const Vec3 grid_origin = cfg.env.ranges.workspace_origin;
  const double res = cfg.env.ranges.resolution;
  const auto& dims = cfg.env.pcfg.grid_dims;

  world::Scene scene = trial.scene;
  kin::VecX q = trial.q0;

  control::Command cmd;
  cmd.mode = Mode::kProtective;
  cmd.tool = ToolRegion{};  // the crossing benchmark runs bare-handed

  Rng noise_rng = Rng::derive(seed, 2);
  Rng* noise = cfg.env.camera_noise ? &noise_rng : nullptr;

  std::unique_ptr<perception::PerceptionModel> model;
  std::unique_ptr<rl::ActorCritic> ac;
  control::ControllerState ctrl;
  ctrl.reset(q);
  world::VoxelGrid memory(grid_origin, res, dims, 0.5);
  if (method == Method::kHybridRl) {
    if (assets == nullptr || !assets->complete()) {
      throw std::runtime_error("run_dynamic_trial: missing policy assets");
    }
    Rng mrng(0);
    model = std::make_unique<perception::PerceptionModel>(cfg.env.pcfg, mrng);
    model->restore(*assets->perception);
    Rng arng(0);
    ac = std::make_unique<rl::ActorCritic>(make_policy_config(cfg), arng);
    ac->restore(*assets->policy);
  }

  std::unique_ptr<baselines::MppiController> mppi;
  if (method == Method::kMppi) {
    mppi = std::make_unique<baselines::MppiController>(
        chain, cfg.mppi, Rng::derive(seed, 3).next_u64());
  }
  std::vector<baselines::ObstacleTrack> tracks;
  baselines::TrackerConfig tcfg;
  tcfg.min_z = cfg.env.ranges.table_height + 1e-9;

  const double sweep_len = (trial.sweep_end - trial.sweep_start).norm();
  const double sweep_time = sweep_len / trial.waypoint_speed;

  TrialRecord rec;
  rec.min_clearance = std::numeric_limits<double>::infinity();

  for (int t = 0; t < cfg.bench.max_steps; ++t) {
    const double s =
        sweep_time > 0.0 ? std::min(1.0, (t * dt) / sweep_time) : 1.0;
    cmd.target = outward_pose(trial.sweep_start +
                              s * (trial.sweep_end - trial.sweep_start));

    const kin::FkResult fk = kin::forward_kinematics(chain, q);
    const auto spheres = kin::body_spheres_world(chain, fk);

    double v_body = 0.0;
    double v_tool = 0.0;
    int reactive = 0;
    kin::VecX q_des;

    if (method == Method::kHybridRl) {
      const auto depth =
          perception::render_depth(cfg.env.camera, scene, spheres, cmd.tool,
                                   fk.ee, noise);
      const auto cloud = perception::depth_to_cloud(cfg.env.camera, depth);
      const auto obsgrid = perception::voxelize_observation(
          cloud, cfg.env.camera.pose.position, grid_origin, res, dims);
      const auto proprio = control::build_proprio(ctrl, cmd);
      const auto out = model->encode(obsgrid, memory, proprio);
      memory = out.predicted_occupancy;
      v_body = out.v_body;
      v_tool = out.v_tool;
      const double v_max = safety::aggregate(v_body, v_tool, cmd.mode);
      const auto obs = control::build_observation(out.latent, ctrl, cmd);
      const auto action = ac->policy_mean(obs);
      kin::VecX av(chain.n_joints);
      for (int i = 0; i < chain.n_joints; ++i) av[i] = action[i];
      control::HybridTelemetry ht;
      q_des = control::hybrid_step(chain, ctrl, q, av, v_max, cmd, dt, &ht);
      reactive = ht.active == safety::ControlState::kReactive ? 1 : 0;
      ctrl.push_command(q_des);
    } else {
      baselines::ClearanceFn clear;
      world::VoxelGrid esdf(grid_origin, res, dims, 0.0);
      if (perception == PerceptionSource::kGroundTruth) {
        clear = [&scene](const Vec3& p) {
          return baselines::clearance_from_gt(p, scene);
        };
      } else {
        const auto depth =
            perception::render_depth(cfg.env.camera, scene, spheres, cmd.tool,
                                     fk.ee, noise);
        const auto cloud = perception::depth_to_cloud(cfg.env.camera, depth);
        auto obsgrid = perception::voxelize_observation(
            cloud, cfg.env.camera.pose.position, grid_origin, res, dims);
        obsgrid = perception::filter_self(obsgrid, spheres, cmd.tool, fk.ee);
        if (perception == PerceptionSource::kClusters) {
          tracks = baselines::cluster_and_track(obsgrid.occupancy, tracks, dt, tcfg);
          clear = [&tracks](const Vec3& p) {
            return baselines::clearance_from_tracks(p, tracks);
          };
        } else {
          memory = perception::fuse_memory(memory, obsgrid);
          world::VoxelGrid occ(grid_origin, res, dims, 0.0);
          for (std::size_t i = 0; i < occ.cells.size(); ++i) {
            occ.cells[i] = memory.cells[i] > 0.5 ? 1.0 : 0.0;
          }
          esdf = world::compute_esdf(occ);
          clear = [&esdf](const Vec3& p) {
            return baselines::clearance_from_esdf(p, esdf);
          };
        }
      }
      if (method == Method::kApf) {
        q_des = baselines::apf_step(chain, q, cmd.target, cmd.tool, clear,
                                    cfg.apf, dt);
      } else {
        q_des = mppi->step(q, cmd.target, cmd.tool, clear);
      }
    }

    q = q_des;
    if (method == Method::kHybridRl) ctrl.push_joint(q);
    scene = world::step_obstacles(scene, dt);

    const kin::FkResult fk_next = kin::forward_kinematics(chain, q);
    const auto spheres_next = kin::body_spheres_world(chain, fk_next);
    const Adjudication adj = adjudicate(scene, spheres_next, fk_next.ee, cmd);
    rec.min_clearance = std::min(rec.min_clearance, adj.worst_clearance);
    rec.steps = t + 1;
    rec.final_error = (fk_next.ee.position - trial.sweep_end).norm();

    if (telemetry != nullptr) {
      telemetry->col(t);
      for (int i = 0; i < chain.n_joints; ++i) telemetry->col(q[i]);
      telemetry->col(fk_next.ee.position.x())
          .col(fk_next.ee.position.y())
          .col(fk_next.ee.position.z())
          .col(cmd.target.position.x())
          .col(cmd.target.position.y())
          .col(cmd.target.position.z())
          .col(adj.worst_clearance)
          .col(reactive)
          .col(v_body)
          .col(v_tool);
      telemetry->end_row();
    }

    if (adj.collision) {
      rec.outcome = TrialOutcome::kCollision;
      return rec;
    }
    if (adj.tool_violation) {
      rec.outcome = TrialOutcome::kToolViolation;
      return rec;
    }
    if (s >= 1.0 && rec.final_error <= cfg.bench.success_tolerance) {
      rec.outcome = TrialOutcome::kSuccess;
      return rec;
    }
  }
  rec.outcome = TrialOutcome::kTimeout;
  return rec;
}

EpisodeEvalStats evaluate_env_episodes(rl::Env& env, rl::ActorCritic& ac,
                                       int episodes, std::uint64_t seed) {
  EpisodeEvalStats stats;
  stats.episodes = episodes;
  double reward_sum = 0.0;
  long reward_steps = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<float> obs = env.reset(Rng::derive(seed, ep).next_u64());
    bool collided = false;
    bool tool_violated = false;
    while (true) {
      const std::vector<double> action = ac.policy_mean(obs);
      const rl::StepResult res = env.step(action);
      reward_sum += res.reward;
      ++reward_steps;
      if (res.costs[0] > 0.0) collided = true;
      if (res.costs[1] > 0.0) tool_violated = true;
      obs = res.obs;
      if (res.terminal || res.truncated) break;
    }
    if (env.success()) ++stats.successes;
    if (collided) ++stats.collisions;
    if (tool_violated) ++stats.tool_violations;
  }
  stats.mean_reward = reward_steps > 0 ? reward_sum / reward_steps : 0.0;
  return stats;
}

}  // namespace reflex::bench
