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

#ifndef REFLEX_RL_GAE_HPP_
#define REFLEX_RL_GAE_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace reflex::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation over one trajectory segment.
/// values has length T+1; values[T] is the bootstrap for the final step.
/// dones[t] = 1 cuts both the TD target and the recursion at step t.
inline GaeResult gae(const std::vector<double>& rewards,
                     const std::vector<double>& values,
                     const std::vector<std::uint8_t>& dones, double gamma,
                     double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T + 1 || dones.size() != T)
    throw std::invalid_argument("gae: length mismatch (values must be T+1)");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gae: bad gamma");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("gae: bad lambda");
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.returns.assign(T, 0.0);
  double running = 0.0;
  for (std::size_t i = T; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * values[i + 1] * not_done - values[i];
    running = delta + gamma * lambda * not_done * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

}  // namespace reflex::rl

#endif  // REFLEX_RL_GAE_HPP_
