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

#include "reflex/kinematics/ik.hpp"

#include <cmath>
#include <stdexcept>

namespace reflex::kin {

Eigen::Matrix<double, 6, 1> pose_twist_error(const Pose& target, const Pose& current) {
  Eigen::Matrix<double, 6, 1> err;
  err.head<3>() = target.position - current.position;
  err.tail<3>() = orientation_error(target.orientation, current.orientation);
  return err;
}

VecX dls_ik_step(const SerialChain& chain, const VecX& q, const Pose& target,
                 double damping) {
  if (!(damping > 0.0)) throw std::invalid_argument("dls_ik_step: damping must be > 0");
  const FkResult fk = forward_kinematics(chain, q);
  const Eigen::Matrix<double, 6, 1> err = pose_twist_error(target, fk.ee);
  const Mat6X jac = jacobian(chain, q);
  Eigen::Matrix<double, 6, 6> gram = jac * jac.transpose();
  gram.diagonal().array() += damping * damping;
  return jac.transpose() * gram.ldlt().solve(err);
}

namespace {

double combined_residual(const SerialChain& chain, const VecX& q, const Pose& target,
                         double* pos_out = nullptr, double* rot_out = nullptr) {
  const FkResult fk = forward_kinematics(chain, q);
  const double pos = (target.position - fk.ee.position).norm();
  const double rot = orientation_distance(target.orientation, fk.ee.orientation);
  if (pos_out) *pos_out = pos;
  if (rot_out) *rot_out = rot;
  return std::sqrt(pos * pos + rot * rot);
}

}  // namespace

IkResult solve_ik(const SerialChain& chain, const VecX& q0, const Pose& target,
                  const IkOptions& opts) {
  if (!(opts.tol_pos > 0.0) || !(opts.tol_rot > 0.0))
    throw std::invalid_argument("solve_ik: tolerances must be > 0");
  IkResult res;
  res.q = clamp_to_limits(chain, q0);
  double best = combined_residual(chain, res.q, target, &res.pos_residual,
                                  &res.rot_residual);
  for (int it = 0; it < opts.max_iters; ++it) {
    if (res.pos_residual < opts.tol_pos && res.rot_residual < opts.tol_rot) {
      res.converged = true;
      return res;
    }
    const VecX dq = dls_ik_step(chain, res.q, target, opts.damping);
    bool accepted = false;
    double scale = 1.0;
    for (int bt = 0; bt < 24; ++bt, scale *= 0.5) {
      const VecX q_try = clamp_to_limits(chain, res.q + scale * dq);
      double pos, rot;
      const double trial = combined_residual(chain, q_try, target, &pos, &rot);
      if (trial <= best) {
        res.q = q_try;
        best = trial;
        res.pos_residual = pos;
        res.rot_residual = rot;
        accepted = true;
        break;
      }
    }
    res.iters = it + 1;
    if (opts.residual_trace) opts.residual_trace->push_back(best);
    // No scale improved the residual: stuck at a limit-clamped or
    // out-of-reach fixed point.
    if (!accepted) break;
  }
  res.converged =
      res.pos_residual < opts.tol_pos && res.rot_residual < opts.tol_rot;
  return res;
}

}  // namespace reflex::kin
