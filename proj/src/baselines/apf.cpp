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

#include "reflex/baselines/apf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reflex::baselines {

void ApfConfig::validate() const {
  if (k_attr <= 0.0 || k_rep <= 0.0) throw std::invalid_argument("apf: gains must be positive");
  if (d0 <= 0.0) throw std::invalid_argument("apf: influence distance must be positive");
  if (max_speed <= 0.0) throw std::invalid_argument("apf: max speed must be positive");
  if (k_center < 0.0) throw std::invalid_argument("apf: k_center must be >= 0");
}

namespace {

// Damped least-squares inverse of a 3xN point Jacobian applied to a task
// velocity. The heavy damping bounds the commanded rates near folds, where
// an accurate inverse would demand joint speeds no barrier could override.
Eigen::MatrixXd dls_pinv(const Eigen::MatrixXd& jac) {
  const Eigen::MatrixXd jjt =
      jac * jac.transpose() +
      1e-2 * Eigen::MatrixXd::Identity(jac.rows(), jac.rows());
  return jac.transpose() * jjt.inverse();
}

}  // namespace

kin::VecX apf_step(const kin::SerialChain& chain, const kin::VecX& q,
                   const Pose& target, const ToolRegion& tool,
                   const ClearanceFn& clearance, const ApfConfig& cfg, double dt) {
  cfg.validate();
  const kin::JointFrames frames = kin::joint_frames(chain, q);
  const Eigen::MatrixXd jac = kin::jacobian(chain, q).topRows(3);
  const Eigen::MatrixXd pinv = dls_pinv(jac);
  kin::VecX qdot = kin::VecX::Zero(chain.n_joints);

  // Resolved-rate attraction. A transpose-only pull stalls whenever the fold
  // geometry aligns the torque with a clamped joint limit, which is exactly
  // where the arm lands after an obstacle shoves it aside.
  Vec3 v_attr = cfg.k_attr * (target.position - frames.fk.ee.position);
  const double an = v_attr.norm();
  if (an > cfg.max_speed) v_attr *= cfg.max_speed / an;
  qdot += pinv * v_attr;

  const auto repel = [&](const Vec3& point, double radius, int link) {
    const double d = clearance(point) - radius;
    if (d >= cfg.d0) return;
    const double dd = std::max(d, 1e-3);  // contact guard
    const double mag =
        std::min(cfg.k_rep * (1.0 / dd - 1.0 / cfg.d0) / (dd * dd), cfg.max_speed);
    const Vec3 grad = clearance_gradient(clearance, point);
    const double gn = grad.norm();
    if (gn < 1e-9) return;  // degenerate gradient (symmetric minimum)
    qdot += dls_pinv(kin::point_jacobian(chain, frames, link, point)) *
            (mag / gn * grad);
  };

  for (const kin::WorldSphere& s : kin::body_spheres_world(chain, q))
    repel(s.center, s.radius, s.link);
  if (!tool.empty())
    for (const Vec3& c : tool.corners_world(frames.fk.ee))
      repel(c, 0.0, chain.n_joints - 1);

  // Mid-range centering projected into the task nullspace so it cannot
  // disturb the EE; it only unfolds the arm along self-motions.
  if (cfg.k_center > 0.0) {
    const kin::VecX q_mid = 0.5 * (chain.joint_limits_lo + chain.joint_limits_hi);
    const kin::VecX centering = cfg.k_center * (q_mid - q);
    qdot += centering - pinv * (jac * centering);
  }

  // Joint-limit barrier, deliberately unprojected. The resolved-rate pull
  // happily commands rates into a clamped limit, and once a folded arm is
  // pinned there the field freezes; the barrier diverges at the limit so it
  // always wins locally and backs the joint out.
  constexpr double kLimitZone = 0.3;   // rad
  constexpr double kLimitGain = 2e-3;  // rad^2/s
  for (int i = 0; i < chain.n_joints; ++i) {
    const double lo = q[i] - chain.joint_limits_lo[i];
    const double hi = chain.joint_limits_hi[i] - q[i];
    const auto barrier = [](double s) {
      const double ss = std::max(s, 1e-3);
      return std::min(kLimitGain * (1.0 / ss - 1.0 / kLimitZone) / (ss * ss),
                      M_PI);
    };
    if (lo < kLimitZone) qdot[i] += barrier(lo);
    if (hi < kLimitZone) qdot[i] -= barrier(hi);
  }

  const kin::VecX q_des = kin::clamp_to_limits(chain, q + dt * qdot);
  return kin::rate_limit(chain, q, q_des, dt);
}

}  // namespace reflex::baselines
