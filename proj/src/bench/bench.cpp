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

#include "reflex/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "reflex/baselines/clearance.hpp"
#include "reflex/baselines/mppi.hpp"
#include "reflex/bench/io.hpp"
#include "reflex/control/controller.hpp"
#include "reflex/core/parallel.hpp"
#include "reflex/kinematics/ik.hpp"
#include "reflex/perception/model.hpp"
#include "reflex/perception/observation.hpp"
#include "reflex/rl/pretrain.hpp"
#include "reflex/world/esdf.hpp"
#include "reflex/world/scenario.hpp"

namespace reflex::bench {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

Pose outward_pose(const Vec3& p) {
  Pose pose;
  pose.position = p;
  pose.orientation = Quat(Eigen::AngleAxisd(std::atan2(p.y(), p.x()),
                                            Vec3::UnitZ()));
  return pose;
}

/// Lateral line the scripted encounters share: radius in the middle of the
/// target shell, height at the planar working plane (or mid range).
struct SweepLine {
  double x = 0.0;
  double y_span = 0.0;
  double z = 0.0;
};

SweepLine sweep_line(const world::ScenarioRanges& r) {
  SweepLine line;
  line.z = r.target_z >= 0.0
               ? r.target_z
               : 0.5 * (r.target_z_range.x() + r.target_z_range.y());
  line.x = 0.5 * (r.target_radius_range.x() + r.target_radius_range.y());
  line.y_span = 0.8 * line.x;
  return line;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dynamic benchmark

std::vector<std::pair<Method, PerceptionSource>> default_benchmark_entries(
    bool with_rl) {
  std::vector<std::pair<Method, PerceptionSource>> entries = {
      {Method::kApf, PerceptionSource::kGroundTruth},
      {Method::kApf, PerceptionSource::kClusters},
      {Method::kApf, PerceptionSource::kEsdf},
      {Method::kMppi, PerceptionSource::kGroundTruth},
      {Method::kMppi, PerceptionSource::kClusters},
      {Method::kMppi, PerceptionSource::kEsdf},
  };
  if (with_rl) entries.push_back({Method::kHybridRl, PerceptionSource::kFused});
  return entries;
}

std::vector<BenchmarkCell> run_dynamic_benchmark(
    const AppConfig& cfg,
    const std::vector<std::pair<Method, PerceptionSource>>& entries,
    const PolicyAssets* assets, std::uint64_t seed,
    const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  const std::string telemetry_dir =
      out_dir.empty() ? "" : out_dir + "/telemetry";
  if (cfg.bench.save_telemetry) ensure_dir(telemetry_dir);

  std::vector<BenchmarkCell> cells;
  for (const auto& [method, perception] : entries) {
    for (double speed : cfg.bench.obstacle_speeds) {
      BenchmarkCell cell;
      cell.method = method;
      cell.perception = perception;
      cell.obstacle_speed = speed;
      cell.trials = cfg.bench.trials;
      cell.records.resize(cfg.bench.trials);
      cells.push_back(std::move(cell));
    }
  }

  struct Job {
    std::size_t cell = 0;
    int speed_index = 0;
    int trial = 0;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int speed_index =
        static_cast<int>(c % cfg.bench.obstacle_speeds.size());
    for (int i = 0; i < cfg.bench.trials; ++i) {
      jobs.push_back(Job{c, speed_index, i});
    }
  }

  parallel_for(jobs.size(), cfg.bench.n_workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    BenchmarkCell& cell = cells[job.cell];
    // Trial geometry and run noise depend on (seed, speed, trial) only, so
    // every method faces the same encounter with the same sensor noise.
    const std::uint64_t speed_seed =
        Rng::derive(seed, 40000 + static_cast<std::uint64_t>(job.speed_index))
            .next_u64();
    Rng geometry_rng = Rng::derive(speed_seed, job.trial);
    const DynamicTrial trial =
        make_dynamic_trial(cfg, cell.obstacle_speed, geometry_rng);
    const std::uint64_t run_seed =
        Rng::derive(speed_seed, 100000 + static_cast<std::uint64_t>(job.trial))
            .next_u64();

    if (cfg.bench.save_telemetry && !telemetry_dir.empty()) {
      std::vector<std::string> header = {"step"};
      for (int i = 0; i < cfg.env.chain.n_joints; ++i) {
        header.push_back("q" + std::to_string(i));
      }
      for (const char* name :
           {"ee_x", "ee_y", "ee_z", "target_x", "target_y", "target_z",
            "min_clearance", "reactive", "v_body", "v_tool"}) {
        header.push_back(name);
      }
      CsvWriter telemetry(header);
      cell.records[job.trial] = run_dynamic_trial(
          cfg, cell.method, cell.perception, assets, trial, run_seed,
          &telemetry);
      telemetry.save(telemetry_dir + "/" + method_name(cell.method) + "_" +
                     perception_name(cell.perception) + "_v" +
                     format_double(cell.obstacle_speed) + "_t" +
                     std::to_string(job.trial) + ".csv");
    } else {
      cell.records[job.trial] = run_dynamic_trial(
          cfg, cell.method, cell.perception, assets, trial, run_seed, nullptr);
    }
  });

  for (BenchmarkCell& cell : cells) {
    for (const TrialRecord& rec : cell.records) {
      switch (rec.outcome) {
        case TrialOutcome::kSuccess: ++cell.successes; break;
        case TrialOutcome::kCollision: ++cell.collisions; break;
        case TrialOutcome::kToolViolation: ++cell.tool_violations; break;
        case TrialOutcome::kTimeout: ++cell.timeouts; break;
      }
    }
  }

  if (!out_dir.empty()) {
    CsvWriter results({"method", "perception", "obstacle_speed", "trial",
                       "outcome", "steps", "min_clearance", "final_error"});
    for (const BenchmarkCell& cell : cells) {
      for (std::size_t i = 0; i < cell.records.size(); ++i) {
        const TrialRecord& rec = cell.records[i];
        results.col(method_name(cell.method))
            .col(perception_name(cell.perception))
            .col(cell.obstacle_speed)
            .col(i)
            .col(outcome_name(rec.outcome))
            .col(rec.steps)
            .col(rec.min_clearance)
            .col(rec.final_error);
        results.end_row();
      }
    }
    results.save(out_dir + "/dynamic_results.csv");

    json summary = json::array();
    for (const BenchmarkCell& cell : cells) {
      json row;
      row["method"] = method_name(cell.method);
      row["perception"] = perception_name(cell.perception);
      row["obstacle_speed"] = cell.obstacle_speed;
      row["trials"] = cell.trials;
      row["successes"] = cell.successes;
      row["collisions"] = cell.collisions;
      row["tool_violations"] = cell.tool_violations;
      row["timeouts"] = cell.timeouts;
      row["success_pct"] = cell.success_pct();
      row["collision_pct"] = cell.collision_pct();
      summary.push_back(row);
    }
    write_text(out_dir + "/dynamic_summary.json", summary.dump(2) + "\n");
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Tracking sweep

namespace {

/// Distance scale of the analytic switching proxy. Safety values hit the
/// switch threshold (0.8) when a body sphere or tool sample comes within
/// 0.2 * kProxyScale of an obstacle, which freezes the reactive branch since
/// the sweep runs without a trained policy.
constexpr double kProxyScale = 0.15;

double proxy_value(double distance) {
  return std::clamp(1.0 - distance / kProxyScale, 0.0, 1.0);
}

/// Samples the tool box on a 3x3x3 lattice. Corners alone miss shallow face
/// contacts, for example a wide tool dipping onto a low obstacle between its
/// corner columns.
std::vector<Vec3> tool_lattice_world(const ToolRegion& tool, const Pose& ee) {
  std::vector<Vec3> out;
  out.reserve(27);
  for (int ix = -1; ix <= 1; ++ix)
    for (int iy = -1; iy <= 1; ++iy)
      for (int iz = -1; iz <= 1; ++iz) {
        const Vec3 local =
            tool.offset + 0.5 * Vec3(ix * tool.size.x(), iy * tool.size.y(),
                                     iz * tool.size.z());
        out.push_back(ee * local);
      }
  return out;
}

}  // namespace

std::vector<SweepResult> run_tracking_sweep(const AppConfig& cfg,
                                            std::uint64_t seed,
                                            const std::string& out_dir) {
  (void)seed;  // the sweep is fully scripted; kept for interface symmetry
  cfg.validate();
  ensure_dir(out_dir);

  const kin::SerialChain& chain = cfg.env.chain;
  const world::ScenarioRanges& r = cfg.env.ranges;
  const double dt = cfg.env.dt;
  const SweepLine line = sweep_line(r);

  world::Scene scene;
  scene.workspace_origin = r.workspace_origin;
  scene.workspace_size = r.workspace_size;
  scene.table_height = r.table_height;
  // A low block under the sweep plane: the bare arm clears it everywhere, so
  // avoidance activates only where the tool volume dips onto it and the
  // active area has to grow with the tool size.
  world::ObstacleSpec obstacle;
  obstacle.footprint = world::Footprint::kBox;
  obstacle.size = Eigen::Vector2d(0.12, 0.12);
  obstacle.position = Eigen::Vector2d(line.x, 0.0);
  obstacle.height = std::max(0.0, line.z - 0.07);
  scene.obstacles.push_back(obstacle);

  const double cell_m = cfg.bench.sweep_cell;
  std::vector<double> xs = {line.x - cell_m, line.x, line.x + cell_m};
  std::vector<double> ys;
  for (int k = 0; k < 6; ++k) ys.push_back((k - 2.5) * cell_m);

  const int hold_steps = static_cast<int>(std::lround(cfg.bench.sweep_hold_s / dt));
  const int err_window = std::max(1, static_cast<int>(std::lround(0.5 / dt)));
  const int active_window = std::max(1, static_cast<int>(std::lround(1.0 / dt)));

  kin::IkOptions ik_opts;
  ik_opts.max_iters = 200;
  // Each cell starts from a pose slightly inward of its target at the same
  // azimuth and wrist yaw. The approach is a short radial slide, so steady
  // state errors isolate the controller, not long reconfiguration swings.
  constexpr double kApproachOffset = 0.08;
  constexpr double kMinStartRadius = 0.125;

  std::vector<SweepResult> results;
  for (double tool_size : cfg.bench.sweep_tool_sizes) {
    SweepResult res;
    res.tool_size = tool_size;

    control::Command cmd;
    cmd.mode = Mode::kProtective;
    cmd.tool.offset = Vec3::Zero();
    cmd.tool.size = Vec3::Constant(tool_size);

    for (double x : xs) {
      for (double y : ys) {
        SweepCell cell;
        cell.x = x;
        cell.y = y;
        const Vec3 target(x, y, line.z);
        if (world::scene_clearance(scene, target) < 0.02) {
          cell.status = SweepStatus::kInObstacle;
          res.cells.push_back(cell);
          continue;
        }
        const kin::IkResult reach =
            kin::solve_ik(chain, kin::VecX::Zero(chain.n_joints),
                          outward_pose(target), ik_opts);
        if (!reach.converged) {
          cell.status = SweepStatus::kUnreachable;
          res.cells.push_back(cell);
          continue;
        }

        const double radius = std::hypot(x, y);
        const double scale =
            std::max(radius - kApproachOffset, kMinStartRadius) / radius;
        const Vec3 start_point(scale * x, scale * y, line.z);
        const kin::IkResult start =
            kin::solve_ik(chain, reach.q, outward_pose(start_point), ik_opts);

        cmd.target = outward_pose(target);
        kin::VecX q = start.converged ? start.q : reach.q;
        control::ControllerState ctrl;
        ctrl.reset(q);
        const kin::VecX zero_action = kin::VecX::Zero(chain.n_joints);
        double err_sum = 0.0;
        int err_count = 0;
        bool active = false;
        for (int t = 0; t < hold_steps; ++t) {
          const kin::FkResult fk = kin::forward_kinematics(chain, q);
          double d_body = std::numeric_limits<double>::infinity();
          for (const auto& s : kin::body_spheres_world(chain, fk)) {
            d_body = std::min(
                d_body, world::scene_clearance(scene, s.center) - s.radius);
          }
          double v_tool = 0.0;
          if (!cmd.tool.empty()) {
            double d_tool = std::numeric_limits<double>::infinity();
            for (const Vec3& p : tool_lattice_world(cmd.tool, fk.ee)) {
              d_tool = std::min(d_tool, world::scene_clearance(scene, p));
            }
            v_tool = proxy_value(d_tool);
          }
          const double v_max =
              safety::aggregate(proxy_value(d_body), v_tool, cmd.mode);
          control::HybridTelemetry ht;
          const kin::VecX q_des = control::hybrid_step(chain, ctrl, q,
                                                       zero_action, v_max, cmd,
                                                       dt, &ht);
          ctrl.push_command(q_des);
          q = q_des;
          ctrl.push_joint(q);
          if (t >= hold_steps - err_window) {
            err_sum += (kin::forward_kinematics(chain, q).ee.position - target)
                           .norm();
            ++err_count;
          }
          if (t >= hold_steps - active_window &&
              ht.active == safety::ControlState::kReactive) {
            active = true;
          }
        }
        cell.avoidance_active = active;
        cell.mean_error_mm = 1000.0 * err_sum / err_count;
        res.cells.push_back(cell);
      }
    }

    double free_sum = 0.0;
    int free_count = 0;
    for (const SweepCell& cell : res.cells) {
      if (cell.status != SweepStatus::kOk) continue;
      if (cell.avoidance_active) {
        ++res.active_cells;
      } else {
        free_sum += cell.mean_error_mm;
        ++free_count;
      }
    }
    res.high_error_area_m2 = res.active_cells * cell_m * cell_m;
    res.free_mean_error_mm = free_count > 0 ? free_sum / free_count : 0.0;
    results.push_back(std::move(res));
  }

  if (!out_dir.empty()) {
    for (const SweepResult& res : results) {
      CsvWriter csv({"x", "y", "status", "avoidance_active", "mean_error_mm"});
      for (const SweepCell& cell : res.cells) {
        const char* status = cell.status == SweepStatus::kOk
                                 ? "ok"
                                 : cell.status == SweepStatus::kInObstacle
                                       ? "in_obstacle"
                                       : "unreachable";
        csv.col(cell.x)
            .col(cell.y)
            .col(status)
            .col(cell.avoidance_active ? 1 : 0)
            .col(cell.status == SweepStatus::kOk ? cell.mean_error_mm : 0.0);
        csv.end_row();
      }
      csv.save(out_dir + "/sweep_tool_" + format_double(res.tool_size) +
               ".csv");
    }
    json summary = json::array();
    for (const SweepResult& res : results) {
      json row;
      row["tool_size"] = res.tool_size;
      row["active_cells"] = res.active_cells;
      row["high_error_area_m2"] = res.high_error_area_m2;
      row["free_mean_error_mm"] = res.free_mean_error_mm;
      summary.push_back(row);
    }
    write_text(out_dir + "/sweep_summary.json", summary.dump(2) + "\n");
  }
  return results;
}

// ---------------------------------------------------------------------------
// Memory demo

MemoryDemoResult run_memory_demo(const AppConfig& cfg,
                                 const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);

  const world::ScenarioRanges& r = cfg.env.ranges;
  const Vec3 origin = r.workspace_origin;
  const double res = r.resolution;
  const auto& dims = cfg.env.pcfg.grid_dims;
  const double top = r.workspace_origin.z() + r.workspace_size.z();

  world::Scene empty_scene;
  empty_scene.workspace_origin = r.workspace_origin;
  empty_scene.workspace_size = r.workspace_size;
  empty_scene.table_height = r.table_height;

  // The box sits on the camera-facing half of the table so that once it is
  // removed, rays through its former cells still terminate on the table
  // inside the workspace and carve them free. The occluder stands between
  // the camera and the box and is tall enough to shadow it completely.
  world::ObstacleSpec box;
  box.size = Eigen::Vector2d(0.10, 0.10);
  box.position = Eigen::Vector2d(0.05, -0.15);
  box.height = std::min(0.20, top);

  world::ObstacleSpec occluder;
  occluder.size = Eigen::Vector2d(0.14, 0.06);
  occluder.position = Eigen::Vector2d(0.05, -0.27);
  occluder.height = std::min(0.34, top);

  world::Scene scene_box = empty_scene;
  scene_box.obstacles = {box};
  world::Scene scene_both = empty_scene;
  scene_both.obstacles = {box, occluder};

  constexpr int kVisiblePhase = 30;
  constexpr int kOcclusionSteps = 100;
  constexpr int kRemovalSteps = 40;
  const int total = kVisiblePhase + kOcclusionSteps + kRemovalSteps;

  world::VoxelGrid memory(origin, res, dims, 0.5);
  std::vector<std::uint8_t> observed_ever(memory.cells.size(), 0);
  std::vector<std::size_t> tracked;

  const world::VoxelGrid box_raster = world::rasterize(scene_box, res, dims);

  MemoryDemoResult result;
  result.occlusion_steps = kOcclusionSteps;
  result.occluded_min_prob = 1.0;

  perception::ObservationGrid last_obs =
      perception::make_unknown_grid(origin, res, dims);

  for (int t = 0; t < total; ++t) {
    const world::Scene& scene = t < kVisiblePhase
                                    ? scene_box
                                    : (t < kVisiblePhase + kOcclusionSteps
                                           ? scene_both
                                           : empty_scene);
    const auto depth = perception::render_depth(cfg.env.camera, scene, {},
                                                ToolRegion{}, Pose::identity(),
                                                nullptr);
    const auto cloud = perception::depth_to_cloud(cfg.env.camera, depth);
    last_obs = perception::voxelize_observation(
        cloud, cfg.env.camera.pose.position, origin, res, dims);
    for (std::size_t i = 0; i < observed_ever.size(); ++i) {
      if (last_obs.labels[i] != perception::VoxelLabel::kUnknown) {
        observed_ever[i] = 1;
      }
    }
    memory = perception::fuse_memory(memory, last_obs);

    if (t == kVisiblePhase - 1) {
      // Skip the first voxel layer above the table: rays hitting the table
      // surface deposit occupied evidence there even in an empty scene.
      const double min_z = r.table_height + res;
      for (std::size_t i = 0; i < memory.cells.size(); ++i) {
        const int k = static_cast<int>(i) / (dims[0] * dims[1]);
        const double z = origin.z() + (k + 0.5) * res;
        if (box_raster.cells[i] > 0.5 && z > min_z &&
            memory.cells[i] > 0.9) {
          tracked.push_back(i);
        }
      }
      result.tracked_cells = static_cast<int>(tracked.size());
      if (!out_dir.empty()) {
        save_grid(out_dir + "/obs_visible.grid", last_obs.occupancy);
        save_grid(out_dir + "/fused_visible.grid", memory);
      }
    }
    if (t >= kVisiblePhase) {
      double min_p = 1.0;
      for (std::size_t idx : tracked) min_p = std::min(min_p, memory.cells[idx]);
      result.tracked_min_series.push_back(min_p);
      if (t < kVisiblePhase + kOcclusionSteps) {
        result.occluded_min_prob = std::min(result.occluded_min_prob, min_p);
      }
    }
    if (t == kVisiblePhase + kOcclusionSteps - 1) {
      for (std::size_t i = 0; i < memory.cells.size(); ++i) {
        if (!observed_ever[i]) {
          result.never_observed_max_dev =
              std::max(result.never_observed_max_dev,
                       std::abs(memory.cells[i] - 0.5));
        }
      }
      if (!out_dir.empty()) save_grid(out_dir + "/fused_occluded.grid", memory);
    }
  }

  for (std::size_t idx : tracked) {
    result.post_removal_max_prob =
        std::max(result.post_removal_max_prob, memory.cells[idx]);
  }

  if (!out_dir.empty()) {
    save_grid(out_dir + "/fused_final.grid", memory);
    CsvWriter series({"step", "min_tracked_prob"});
    for (std::size_t i = 0; i < result.tracked_min_series.size(); ++i) {
      series.col(static_cast<int>(i) + kVisiblePhase)
          .col(result.tracked_min_series[i]);
      series.end_row();
    }
    series.save(out_dir + "/memory_series.csv");
    json summary;
    summary["tracked_cells"] = result.tracked_cells;
    summary["occlusion_steps"] = result.occlusion_steps;
    summary["occluded_min_prob"] = result.occluded_min_prob;
    summary["never_observed_max_dev"] = result.never_observed_max_dev;
    summary["post_removal_max_prob"] = result.post_removal_max_prob;
    write_text(out_dir + "/memory_summary.json", summary.dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Latency profile

namespace {

StageStats stats_from(std::vector<double> samples_ms) {
  StageStats s;
  if (samples_ms.empty()) return s;
  const double n = static_cast<double>(samples_ms.size());
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / n;
  double var = 0.0;
  for (double v : samples_ms) var += (v - s.mean_ms) * (v - s.mean_ms);
  s.sd_ms = std::sqrt(var / n);
  s.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
  std::sort(samples_ms.begin(), samples_ms.end());
  s.p50_ms = samples_ms[(samples_ms.size() - 1) / 2];
  return s;
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

LatencyProfile profile_latency(const AppConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const kin::SerialChain& chain = cfg.env.chain;
  const world::ScenarioRanges& r = cfg.env.ranges;
  const auto& dims = cfg.env.pcfg.grid_dims;

  Rng scenario_rng = Rng::derive(seed, 1);
  world::Scenario scenario = world::sample_scenario(scenario_rng, r);
  world::Scene scene = scenario.scene;
  if (!scene.obstacles.empty()) {
    // A slow drifting obstacle keeps the rendered frames from being
    // identical, which would flatter cache behaviour.
    scene.obstacles[0].velocity = Eigen::Vector2d(0.05, 0.05);
  }
  control::Command cmd;
  cmd.target = scenario.waypoints.front();
  cmd.mode = scenario.mode;
  cmd.tool = scenario.tool;

  AppConfig latent_cfg = cfg;
  latent_cfg.env.obs_mode = rl::ObsMode::kLatent;
  Rng model_rng = Rng::derive(seed, 2);
  perception::PerceptionModel model(cfg.env.pcfg, model_rng);
  Rng ac_rng = Rng::derive(seed, 3);
  rl::ActorCritic ac(make_policy_config(latent_cfg), ac_rng);

  kin::VecX q = kin::VecX::Zero(chain.n_joints);
  control::ControllerState ctrl;
  ctrl.reset(q);
  world::VoxelGrid predicted(r.workspace_origin, r.resolution, dims, 0.5);
  world::VoxelGrid fused(r.workspace_origin, r.resolution, dims, 0.5);
  Rng noise_rng = Rng::derive(seed, 4);
  Rng* noise = cfg.env.camera_noise ? &noise_rng : nullptr;

  const int warmup = std::min(20, std::max(1, cfg.bench.profile_steps / 10));
  const int steps = cfg.bench.profile_steps;

  std::vector<double> t_vox, t_esdf, t_inf, t_ctl, t_full;
  t_vox.reserve(steps);
  t_esdf.reserve(steps);
  t_inf.reserve(steps);
  t_ctl.reserve(steps);
  t_full.reserve(steps);

  using clock = std::chrono::steady_clock;
  for (int t = 0; t < warmup + steps; ++t) {
    const kin::FkResult fk = kin::forward_kinematics(chain, q);
    const auto spheres = kin::body_spheres_world(chain, fk);
    const auto depth = perception::render_depth(cfg.env.camera, scene, spheres,
                                                cmd.tool, fk.ee, noise);
    const auto cloud = perception::depth_to_cloud(cfg.env.camera, depth);

    const auto full0 = clock::now();
    const auto v0 = clock::now();
    const auto obsgrid = perception::voxelize_observation(
        cloud, cfg.env.camera.pose.position, r.workspace_origin, r.resolution,
        dims);
    const auto v1 = clock::now();

    const auto e0 = clock::now();
    fused = perception::fuse_memory(fused, obsgrid);
    world::VoxelGrid occ(r.workspace_origin, r.resolution, dims, 0.0);
    for (std::size_t i = 0; i < occ.cells.size(); ++i) {
      occ.cells[i] = fused.cells[i] > 0.5 ? 1.0 : 0.0;
    }
    const world::VoxelGrid esdf = world::compute_esdf(occ);
    const auto e1 = clock::now();

    const auto i0 = clock::now();
    const auto proprio = control::build_proprio(ctrl, cmd);
    const auto out = model.encode(obsgrid, predicted, proprio);
    predicted = out.predicted_occupancy;
    const auto i1 = clock::now();

    const auto c0 = clock::now();
    const double v_max = safety::aggregate(out.v_body, out.v_tool, cmd.mode);
    const auto obs = control::build_observation(out.latent, ctrl, cmd);
    const auto action = ac.policy_mean(obs);
    kin::VecX av(chain.n_joints);
    for (int i = 0; i < chain.n_joints; ++i) av[i] = action[i];
    const kin::VecX q_des =
        control::hybrid_step(chain, ctrl, q, av, v_max, cmd, cfg.env.dt);
    const auto c1 = clock::now();
    const auto full1 = clock::now();

    ctrl.push_command(q_des);
    q = q_des;
    ctrl.push_joint(q);
    scene = world::step_obstacles(scene, cfg.env.dt);
    (void)esdf;

    if (t >= warmup) {
      t_vox.push_back(ms_between(v0, v1));
      t_esdf.push_back(ms_between(e0, e1));
      t_inf.push_back(ms_between(i0, i1));
      t_ctl.push_back(ms_between(c0, c1));
      t_full.push_back(ms_between(full0, full1));
    }
  }

  LatencyProfile profile;
  profile.steps = steps;
  profile.voxelize = stats_from(t_vox);
  profile.esdf = stats_from(t_esdf);
  profile.inference = stats_from(t_inf);
  profile.control = stats_from(t_ctl);
  profile.full_step = stats_from(t_full);

  // Separate planner loop: the sampling planner is not part of the deployed
  // step, so it gets its own budget line.
  const int mppi_steps = std::min(200, steps);
  baselines::MppiController mppi(chain, cfg.mppi, Rng::derive(seed, 5).next_u64());
  world::Scene mppi_scene = scenario.scene;
  baselines::ClearanceFn clear = [&mppi_scene](const Vec3& p) {
    return baselines::clearance_from_gt(p, mppi_scene);
  };
  kin::VecX qm = kin::VecX::Zero(chain.n_joints);
  std::vector<double> t_mppi;
  t_mppi.reserve(mppi_steps);
  for (int t = 0; t < mppi_steps + 5; ++t) {
    const auto m0 = clock::now();
    qm = mppi.step(qm, cmd.target, cmd.tool, clear);
    const auto m1 = clock::now();
    if (t >= 5) t_mppi.push_back(ms_between(m0, m1));
  }
  profile.mppi = stats_from(t_mppi);
  profile.mppi_steps = mppi_steps;
  profile.mppi_samples = cfg.mppi.n_samples;
  return profile;
}

void write_profile(const std::string& out_dir, const LatencyProfile& p) {
  if (out_dir.empty()) return;
  ensure_dir(out_dir);
  auto stage = [](const StageStats& s) {
    json j;
    j["mean_ms"] = s.mean_ms;
    j["sd_ms"] = s.sd_ms;
    j["max_ms"] = s.max_ms;
    j["p50_ms"] = s.p50_ms;
    return j;
  };
  json j;
  j["steps"] = p.steps;
  j["voxelize"] = stage(p.voxelize);
  j["esdf"] = stage(p.esdf);
  j["inference"] = stage(p.inference);
  j["control"] = stage(p.control);
  j["full_step"] = stage(p.full_step);
  j["mppi"] = stage(p.mppi);
  j["mppi_steps"] = p.mppi_steps;
  j["mppi_samples"] = p.mppi_samples;
  write_text(out_dir + "/profile.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Ablation

std::vector<std::string> ablation_variants() {
  return {"end_to_end", "pretrained_ae", "mapping_fusion", "ours"};
}

namespace {

AblationRow run_ablation_variant(const AppConfig& cfg, const std::string& name,
                                 std::uint64_t seed,
                                 const std::string& out_dir) {
  AppConfig vcfg = cfg;
  std::shared_ptr<const std::vector<net::CheckpointEntry>> perception;
  double iou = -1.0;

  if (name == "ours" || name == "pretrained_ae") {
    rl::PretrainConfig pc;
    pc.env = vcfg.env;
    pc.env.obs_mode = rl::ObsMode::kLatent;
    pc.labels_from_observation = (name == "pretrained_ae");
    pc.seed = Rng::derive(seed, 77).next_u64();
    rl::PretrainResult pre = rl::pretrain_encoder(pc);
    iou = pre.train_iou;
    perception = std::make_shared<const std::vector<net::CheckpointEntry>>(
        std::move(pre.weights));
    vcfg.env.obs_mode = rl::ObsMode::kLatent;
    vcfg.env.self_filter_raw = false;
  } else if (name == "end_to_end") {
    vcfg.env.obs_mode = rl::ObsMode::kRawGrid;
    vcfg.env.self_filter_raw = false;
  } else if (name == "mapping_fusion") {
    vcfg.env.obs_mode = rl::ObsMode::kRawGrid;
    vcfg.env.self_filter_raw = true;
  } else {
    throw std::runtime_error("unknown ablation variant '" + name + "'");
  }

  const rl::CmdpEnvConfig env_cfg = vcfg.env;
  auto factory = [env_cfg, perception](int) {
    auto env = std::make_unique<rl::CmdpEnv>(env_cfg);
    if (env_cfg.obs_mode == rl::ObsMode::kLatent) {
      env->set_perception(perception);
    }
    return std::unique_ptr<rl::Env>(std::move(env));
  };

  Rng ac_rng = Rng::derive(seed, 88);
  rl::ActorCritic ac(make_policy_config(vcfg), ac_rng);
  rl::TrainOptions opts;
  opts.cmdp = vcfg.rl;
  opts.updates = vcfg.bench.ablation_updates;
  opts.seed = Rng::derive(seed, 99).next_u64();
  if (!out_dir.empty()) {
    opts.progress_csv = out_dir + "/ablation_train_" + name + ".csv";
  }
  rl::train_p3o(ac, factory, opts);

  auto eval_env = factory(0);
  const EpisodeEvalStats stats =
      evaluate_env_episodes(*eval_env, ac, vcfg.bench.ablation_eval_episodes,
                            Rng::derive(seed, 111).next_u64());

  AblationRow row;
  row.variant = name;
  row.updates = vcfg.bench.ablation_updates;
  row.eval_episodes = stats.episodes;
  row.successes = stats.successes;
  row.collisions = stats.collisions;
  row.tool_violations = stats.tool_violations;
  row.success_pct = stats.success_pct();
  row.collision_pct =
      stats.episodes > 0 ? 100.0 * stats.collisions / stats.episodes : 0.0;
  row.tool_violation_pct =
      stats.episodes > 0 ? 100.0 * stats.tool_violations / stats.episodes : 0.0;
  row.mean_reward = stats.mean_reward;
  row.pretrain_iou = iou;
  return row;
}

}  // namespace

std::vector<AblationRow> run_ablation(const AppConfig& cfg,
                                      const std::vector<std::string>& variants,
                                      std::uint64_t seed,
                                      const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  std::vector<AblationRow> rows;
  for (const std::string& name : variants) {
    rows.push_back(run_ablation_variant(cfg, name, seed, out_dir));
  }

  if (!out_dir.empty()) {
    CsvWriter csv({"variant", "updates", "eval_episodes", "successes",
                   "collisions", "tool_violations", "success_pct",
                   "collision_pct", "tool_violation_pct", "mean_reward",
                   "pretrain_iou"});
    for (const AblationRow& row : rows) {
      csv.col(row.variant)
          .col(row.updates)
          .col(row.eval_episodes)
          .col(row.successes)
          .col(row.collisions)
          .col(row.tool_violations)
          .col(row.success_pct)
          .col(row.collision_pct)
          .col(row.tool_violation_pct)
          .col(row.mean_reward)
          .col(row.pretrain_iou);
      csv.end_row();
    }
    csv.save(out_dir + "/ablation.csv");

    json summary = json::array();
    for (const AblationRow& row : rows) {
      json r;
      r["variant"] = row.variant;
      r["updates"] = row.updates;
      r["eval_episodes"] = row.eval_episodes;
      r["successes"] = row.successes;
      r["collisions"] = row.collisions;
      r["tool_violations"] = row.tool_violations;
      r["success_pct"] = row.success_pct;
      r["collision_pct"] = row.collision_pct;
      r["tool_violation_pct"] = row.tool_violation_pct;
      r["mean_reward"] = row.mean_reward;
      r["pretrain_iou"] = row.pretrain_iou;
      summary.push_back(r);
    }
    write_text(out_dir + "/ablation.json", summary.dump(2) + "\n");
  }
  return rows;
}

}  // namespace reflex::bench
