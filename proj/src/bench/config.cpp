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

#include "reflex/bench/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "reflex/control/controller.hpp"
#include "reflex/kinematics/chain.hpp"

namespace reflex::bench {

using nlohmann::json;

namespace {

void fail(const std::string& what) {
  throw std::runtime_error("config: " + what);
}

/// Typo guard: every key in a section must be one we know how to apply.
void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      fail("unknown key '" + item.key() + "' in section '" + section + "'");
    }
  }
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec2_to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) fail("expected 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Eigen::Vector2d vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail("expected 2-element array");
  return Eigen::Vector2d(j[0].get<double>(), j[1].get<double>());
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void get_if(const json& j, const char* key, Vec3& out) {
  if (j.contains(key)) out = vec3_from_json(j.at(key));
}

void get_if(const json& j, const char* key, Eigen::Vector2d& out) {
  if (j.contains(key)) out = vec2_from_json(j.at(key));
}

Pose look_at_pose(const Vec3& position, const Vec3& target) {
  const Vec3 f = (target - position).normalized();
  const Vec3 x = f.cross(Vec3::UnitZ()).normalized();
  Eigen::Matrix3d rot;
  rot.col(0) = x;
  rot.col(1) = f.cross(x);
  rot.col(2) = f;
  Pose p;
  p.position = position;
  p.orientation = Quat(rot).normalized();
  return p;
}

json camera_to_json(const perception::CameraModel& cam) {
  json j;
  j["position"] = vec3_to_json(cam.pose.position);
  j["orientation_wxyz"] =
      json::array({cam.pose.orientation.w(), cam.pose.orientation.x(),
                   cam.pose.orientation.y(), cam.pose.orientation.z()});
  j["fov_h"] = cam.fov_h;
  j["fov_v"] = cam.fov_v;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["max_range"] = cam.max_range;
  j["noise_sigma"] = cam.noise_sigma;
  j["dropout"] = cam.dropout;
  return j;
}

void camera_from_json(const json& j, perception::CameraModel& cam) {
  check_keys(j, "camera",
             {"position", "look_at", "orientation_wxyz", "fov_h", "fov_v",
              "width", "height", "max_range", "noise_sigma", "dropout"});
  if (j.contains("look_at") && j.contains("orientation_wxyz")) {
    fail("camera: give either look_at or orientation_wxyz, not both");
  }
  Vec3 position = cam.pose.position;
  get_if(j, "position", position);
  cam.pose.position = position;
  if (j.contains("orientation_wxyz")) {
    const json& q = j.at("orientation_wxyz");
    if (!q.is_array() || q.size() != 4) fail("camera: orientation needs 4 values");
    cam.pose.orientation = Quat(q[0].get<double>(), q[1].get<double>(),
                                q[2].get<double>(), q[3].get<double>())
                               .normalized();
  } else if (j.contains("look_at")) {
    cam.pose = look_at_pose(position, vec3_from_json(j.at("look_at")));
  }
  get_if(j, "fov_h", cam.fov_h);
  get_if(j, "fov_v", cam.fov_v);
  get_if(j, "width", cam.width);
  get_if(j, "height", cam.height);
  get_if(j, "max_range", cam.max_range);
  get_if(j, "noise_sigma", cam.noise_sigma);
  get_if(j, "dropout", cam.dropout);
}

json ranges_to_json(const world::ScenarioRanges& r) {
  json j;
  j["min_obstacles"] = r.min_obstacles;
  j["max_obstacles"] = r.max_obstacles;
  j["footprint_range"] = vec2_to_json(r.footprint_range);
  j["height_range"] = vec2_to_json(r.height_range);
  j["speed_range"] = vec2_to_json(r.speed_range);
  j["cylinder_prob"] = r.cylinder_prob;
  j["n_waypoints"] = r.n_waypoints;
  j["target_clearance"] = r.target_clearance;
  j["target_radius_range"] = vec2_to_json(r.target_radius_range);
  j["target_z"] = r.target_z;
  j["target_z_range"] = vec2_to_json(r.target_z_range);
  j["base_position"] = vec3_to_json(r.base_position);
  j["base_clear_radius"] = r.base_clear_radius;
  j["tool_size_max"] = vec3_to_json(r.tool_size_max);
  j["tool_offset_range"] = vec3_to_json(r.tool_offset_range);
  j["protective_prob"] = r.protective_prob;
  j["max_tries"] = r.max_tries;
  return j;
}

void ranges_from_json(const json& j, world::ScenarioRanges& r) {
  check_keys(j, "scenario_ranges",
             {"min_obstacles", "max_obstacles", "footprint_range",
              "height_range", "speed_range", "cylinder_prob", "n_waypoints",
              "target_clearance", "target_radius_range", "target_z",
              "target_z_range", "base_position", "base_clear_radius",
              "tool_size_max", "tool_offset_range", "protective_prob",
              "max_tries"});
  get_if(j, "min_obstacles", r.min_obstacles);
  get_if(j, "max_obstacles", r.max_obstacles);
  get_if(j, "footprint_range", r.footprint_range);
  get_if(j, "height_range", r.height_range);
  get_if(j, "speed_range", r.speed_range);
  get_if(j, "cylinder_prob", r.cylinder_prob);
  get_if(j, "n_waypoints", r.n_waypoints);
  get_if(j, "target_clearance", r.target_clearance);
  get_if(j, "target_radius_range", r.target_radius_range);
  get_if(j, "target_z", r.target_z);
  get_if(j, "target_z_range", r.target_z_range);
  get_if(j, "base_position", r.base_position);
  get_if(j, "base_clear_radius", r.base_clear_radius);
  get_if(j, "tool_size_max", r.tool_size_max);
  get_if(j, "tool_offset_range", r.tool_offset_range);
  get_if(j, "protective_prob", r.protective_prob);
  get_if(j, "max_tries", r.max_tries);
}

json rl_to_json(const AppConfig& cfg) {
  const rl::CmdpConfig& c = cfg.rl;
  json j;
  j["obs_mode"] = cfg.env.obs_mode == rl::ObsMode::kLatent ? "latent" : "raw_grid";
  j["self_filter_raw"] = cfg.env.self_filter_raw;
  j["camera_noise"] = cfg.env.camera_noise;
  j["env_max_steps"] = cfg.env.max_steps;
  j["waypoint_tolerance"] = cfg.env.waypoint_tolerance;
  j["init_limit_fraction"] = cfg.env.init_limit_fraction;
  j["latent_dim"] = cfg.env.pcfg.latent_dim;
  j["gamma"] = c.gamma;
  j["lambda_gae"] = c.lambda_gae;
  j["cost_limits"] = c.cost_limits;
  j["kappa"] = c.kappa;
  j["clip_ratio"] = c.clip_ratio;
  j["epochs"] = c.epochs;
  j["minibatch"] = c.minibatch;
  j["horizon"] = c.horizon;
  j["n_envs"] = c.n_envs;
  j["lr"] = c.lr;
  j["entropy_coef"] = c.entropy_coef;
  j["value_coef"] = c.value_coef;
  j["max_grad_norm"] = c.max_grad_norm;
  j["n_workers"] = c.n_workers;
  return j;
}

void rl_from_json(const json& j, AppConfig& cfg) {
  check_keys(j, "rl",
             {"obs_mode", "self_filter_raw", "camera_noise", "env_max_steps",
              "waypoint_tolerance", "init_limit_fraction", "latent_dim",
              "gamma", "lambda_gae", "cost_limits", "kappa", "clip_ratio",
              "epochs", "minibatch", "horizon", "n_envs", "lr", "entropy_coef",
              "value_coef", "max_grad_norm", "n_workers"});
  if (j.contains("obs_mode")) {
    const std::string mode = j.at("obs_mode").get<std::string>();
    if (mode == "latent") {
      cfg.env.obs_mode = rl::ObsMode::kLatent;
    } else if (mode == "raw_grid") {
      cfg.env.obs_mode = rl::ObsMode::kRawGrid;
    } else {
      fail("rl.obs_mode must be 'latent' or 'raw_grid'");
    }
  }
  get_if(j, "self_filter_raw", cfg.env.self_filter_raw);
  get_if(j, "camera_noise", cfg.env.camera_noise);
  get_if(j, "env_max_steps", cfg.env.max_steps);
  get_if(j, "waypoint_tolerance", cfg.env.waypoint_tolerance);
  get_if(j, "init_limit_fraction", cfg.env.init_limit_fraction);
  get_if(j, "latent_dim", cfg.env.pcfg.latent_dim);
  rl::CmdpConfig& c = cfg.rl;
  get_if(j, "gamma", c.gamma);
  get_if(j, "lambda_gae", c.lambda_gae);
  if (j.contains("cost_limits")) {
    auto v = j.at("cost_limits").get<std::vector<double>>();
    if (v.size() != c.cost_limits.size()) fail("rl.cost_limits needs 4 values");
    std::copy(v.begin(), v.end(), c.cost_limits.begin());
  }
  if (j.contains("kappa")) {
    auto v = j.at("kappa").get<std::vector<double>>();
    if (v.size() != c.kappa.size()) fail("rl.kappa needs 4 values");
    std::copy(v.begin(), v.end(), c.kappa.begin());
  }
  get_if(j, "clip_ratio", c.clip_ratio);
  get_if(j, "epochs", c.epochs);
  get_if(j, "minibatch", c.minibatch);
  get_if(j, "horizon", c.horizon);
  get_if(j, "n_envs", c.n_envs);
  get_if(j, "lr", c.lr);
  get_if(j, "entropy_coef", c.entropy_coef);
  get_if(j, "value_coef", c.value_coef);
  get_if(j, "max_grad_norm", c.max_grad_norm);
  get_if(j, "n_workers", c.n_workers);
}

json mppi_to_json(const baselines::MppiConfig& c) {
  json j;
  j["horizon_s"] = c.horizon_s;
  j["n_samples"] = c.n_samples;
  j["temperature"] = c.temperature;
  j["sigma_u"] = c.sigma_u;
  j["w_tracking"] = c.w_tracking;
  j["w_collision"] = c.w_collision;
  j["w_smooth"] = c.w_smooth;
  j["collision_margin"] = c.collision_margin;
  j["n_workers"] = c.n_workers;
  return j;
}

void mppi_from_json(const json& j, baselines::MppiConfig& c) {
  check_keys(j, "mppi",
             {"horizon_s", "n_samples", "temperature", "sigma_u", "w_tracking",
              "w_collision", "w_smooth", "collision_margin", "n_workers"});
  get_if(j, "horizon_s", c.horizon_s);
  get_if(j, "n_samples", c.n_samples);
  get_if(j, "temperature", c.temperature);
  get_if(j, "sigma_u", c.sigma_u);
  get_if(j, "w_tracking", c.w_tracking);
  get_if(j, "w_collision", c.w_collision);
  get_if(j, "w_smooth", c.w_smooth);
  get_if(j, "collision_margin", c.collision_margin);
  get_if(j, "n_workers", c.n_workers);
}

json apf_to_json(const baselines::ApfConfig& c) {
  json j;
  j["k_attr"] = c.k_attr;
  j["k_rep"] = c.k_rep;
  j["d0"] = c.d0;
  j["max_speed"] = c.max_speed;
  j["k_center"] = c.k_center;
  return j;
}

void apf_from_json(const json& j, baselines::ApfConfig& c) {
  check_keys(j, "apf", {"k_attr", "k_rep", "d0", "max_speed", "k_center"});
  get_if(j, "k_attr", c.k_attr);
  get_if(j, "k_rep", c.k_rep);
  get_if(j, "d0", c.d0);
  get_if(j, "max_speed", c.max_speed);
  get_if(j, "k_center", c.k_center);
}

json bench_to_json(const BenchSettings& b) {
  json j;
  j["trials"] = b.trials;
  j["waypoint_speed"] = b.waypoint_speed;
  j["obstacle_speeds"] = b.obstacle_speeds;
  j["success_tolerance"] = b.success_tolerance;
  j["max_steps"] = b.max_steps;
  j["sweep_tool_sizes"] = b.sweep_tool_sizes;
  j["sweep_hold_s"] = b.sweep_hold_s;
  j["sweep_cell"] = b.sweep_cell;
  j["profile_steps"] = b.profile_steps;
  j["ablation_updates"] = b.ablation_updates;
  j["ablation_eval_episodes"] = b.ablation_eval_episodes;
  j["n_workers"] = b.n_workers;
  j["save_telemetry"] = b.save_telemetry;
  j["policy_checkpoint"] = b.policy_checkpoint;
  j["perception_checkpoint"] = b.perception_checkpoint;
  return j;
}

void bench_from_json(const json& j, BenchSettings& b) {
  check_keys(j, "bench",
             {"trials", "waypoint_speed", "obstacle_speeds",
              "success_tolerance", "max_steps", "sweep_tool_sizes",
              "sweep_hold_s", "sweep_cell", "profile_steps",
              "ablation_updates", "ablation_eval_episodes", "n_workers",
              "save_telemetry", "policy_checkpoint", "perception_checkpoint"});
  get_if(j, "trials", b.trials);
  get_if(j, "waypoint_speed", b.waypoint_speed);
  get_if(j, "obstacle_speeds", b.obstacle_speeds);
  get_if(j, "success_tolerance", b.success_tolerance);
  get_if(j, "max_steps", b.max_steps);
  get_if(j, "sweep_tool_sizes", b.sweep_tool_sizes);
  get_if(j, "sweep_hold_s", b.sweep_hold_s);
  get_if(j, "sweep_cell", b.sweep_cell);
  get_if(j, "profile_steps", b.profile_steps);
  get_if(j, "ablation_updates", b.ablation_updates);
  get_if(j, "ablation_eval_episodes", b.ablation_eval_episodes);
  get_if(j, "n_workers", b.n_workers);
  get_if(j, "save_telemetry", b.save_telemetry);
  get_if(j, "policy_checkpoint", b.policy_checkpoint);
  get_if(j, "perception_checkpoint", b.perception_checkpoint);
}

}  // namespace

void BenchSettings::validate() const {
  if (trials <= 0) fail("bench.trials must be positive");
  if (waypoint_speed <= 0) fail("bench.waypoint_speed must be positive");
  if (success_tolerance <= 0) fail("bench.success_tolerance must be positive");
  if (max_steps <= 0) fail("bench.max_steps must be positive");
  if (sweep_hold_s <= 0) fail("bench.sweep_hold_s must be positive");
  if (sweep_cell <= 0) fail("bench.sweep_cell must be positive");
  if (profile_steps <= 0) fail("bench.profile_steps must be positive");
  if (ablation_updates <= 0) fail("bench.ablation_updates must be positive");
  if (ablation_eval_episodes <= 0) {
    fail("bench.ablation_eval_episodes must be positive");
  }
  if (n_workers <= 0) fail("bench.n_workers must be positive");
  for (double s : obstacle_speeds) {
    if (s < 0) fail("bench.obstacle_speeds must be non-negative");
  }
  for (double s : sweep_tool_sizes) {
    if (s < 0) fail("bench.sweep_tool_sizes must be non-negative");
  }
}

void AppConfig::validate() const {
  if (version != 1) fail("unsupported config version");
  rl.validate();
  apf.validate();
  mppi.validate();
  bench.validate();
  env.pcfg.validate();
  if (env.pcfg.proprio_dim != control::proprio_dim(env.chain.n_joints)) {
    fail("proprio_dim does not match the chain");
  }
  for (int a = 0; a < 3; ++a) {
    const double span =
        env.pcfg.grid_dims[a] * env.ranges.resolution;
    if (std::abs(span - env.ranges.workspace_size[a]) > 1e-9) {
      fail("grid dims do not tile the workspace");
    }
  }
}

AppConfig make_desk_config() {
  AppConfig cfg;
  cfg.chain_name = "planar3_desk";
  cfg.env = rl::make_desk_env_config();
  // Protocol default is 4000 samples; the desk preset trades optimality for
  // wall-clock so a full 50-trial table stays interactive.
  cfg.mppi.n_samples = 512;
  return cfg;
}

AppConfig make_arm6_config() {
  AppConfig cfg;
  cfg.chain_name = "arm6";
  rl::CmdpEnvConfig& env = cfg.env;
  env.chain = kin::make_arm6();
  env.ranges = world::ScenarioRanges{};  // defaults are already full scale
  env.ranges.target_radius_range = Eigen::Vector2d(0.25, 0.6);
  env.ranges.target_z = -1.0;  // sample target height from the range
  env.ranges.base_clear_radius = 0.15;
  env.camera = perception::CameraModel{};
  env.camera.pose = look_at_pose(Vec3(0.0, -1.4, 1.0), Vec3(0.0, 0.0, 0.3));
  env.pcfg.grid_dims = {12, 20, 12};
  env.pcfg.proprio_dim = control::proprio_dim(env.chain.n_joints);
  env.pcfg.latent_dim = 128;
  cfg.mppi.n_samples = 512;
  return cfg;
}

std::string config_to_json(const AppConfig& cfg) {
  json j;
  j["version"] = cfg.version;
  j["chain"] = cfg.chain_name;
  json ws;
  ws["origin"] = vec3_to_json(cfg.env.ranges.workspace_origin);
  ws["size"] = vec3_to_json(cfg.env.ranges.workspace_size);
  ws["resolution"] = cfg.env.ranges.resolution;
  ws["table_height"] = cfg.env.ranges.table_height;
  ws["dims"] = cfg.env.pcfg.grid_dims;
  j["workspace"] = ws;
  j["camera"] = camera_to_json(cfg.env.camera);
  j["scenario_ranges"] = ranges_to_json(cfg.env.ranges);
  j["rl"] = rl_to_json(cfg);
  j["mppi"] = mppi_to_json(cfg.mppi);
  j["apf"] = apf_to_json(cfg.apf);
  j["bench"] = bench_to_json(cfg.bench);
  return j.dump(2) + "\n";
}

AppConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("parse error: ") + e.what());
  }
  check_keys(j, "<root>",
             {"version", "chain", "workspace", "camera", "scenario_ranges",
              "rl", "mppi", "apf", "bench"});

  int version = 1;
  get_if(j, "version", version);
  if (version != 1) fail("unsupported config version");

  std::string chain = "planar3_desk";
  get_if(j, "chain", chain);
  AppConfig cfg;
  if (chain == "planar3_desk") {
    cfg = make_desk_config();
  } else if (chain == "arm6") {
    cfg = make_arm6_config();
  } else {
    fail("unknown chain '" + chain + "'");
  }

  if (j.contains("workspace")) {
    const json& ws = j.at("workspace");
    check_keys(ws, "workspace",
               {"origin", "size", "resolution", "table_height", "dims"});
    get_if(ws, "origin", cfg.env.ranges.workspace_origin);
    get_if(ws, "size", cfg.env.ranges.workspace_size);
    get_if(ws, "resolution", cfg.env.ranges.resolution);
    get_if(ws, "table_height", cfg.env.ranges.table_height);
    if (ws.contains("dims")) {
      auto d = ws.at("dims").get<std::vector<int>>();
      if (d.size() != 3) fail("workspace.dims needs 3 values");
      cfg.env.pcfg.grid_dims = {d[0], d[1], d[2]};
    }
  }
  if (j.contains("camera")) camera_from_json(j.at("camera"), cfg.env.camera);
  if (j.contains("scenario_ranges")) {
    ranges_from_json(j.at("scenario_ranges"), cfg.env.ranges);
  }
  if (j.contains("rl")) rl_from_json(j.at("rl"), cfg);
  if (j.contains("mppi")) mppi_from_json(j.at("mppi"), cfg.mppi);
  if (j.contains("apf")) apf_from_json(j.at("apf"), cfg.apf);
  if (j.contains("bench")) bench_from_json(j.at("bench"), cfg.bench);

  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const std::string& path, const AppConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  out << config_to_json(cfg);
}

}  // namespace reflex::bench
