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

#ifndef REFLEX_CORE_TOOL_REGION_HPP_
#define REFLEX_CORE_TOOL_REGION_HPP_

#include <array>
#include <stdexcept>

#include "reflex/core/pose.hpp"

namespace reflex {

/// Bounding box rigidly attached to the end-effector frame.
struct ToolRegion {
  Vec3 offset = Vec3::Zero();  // box center in the EE frame
  Vec3 size = Vec3::Zero();    // full extents; all components >= 0

  void validate() const {
    if (size.minCoeff() < 0.0)
      throw std::invalid_argument("tool region: size must be >= 0");
  }

  bool empty() const { return size.maxCoeff() <= 0.0; }

  /// The eight box corners, in the world frame of the given EE pose.
  std::array<Vec3, 8> corners_world(const Pose& ee) const {
    std::array<Vec3, 8> out;
    int idx = 0;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) {
          const Vec3 local = offset + 0.5 * Vec3(sx * size.x(), sy * size.y(),
                                                 sz * size.z());
          out[static_cast<std::size_t>(idx++)] = ee * local;
        }
    return out;
  }
};

/// Interaction mode: Engage permits tool-environment contact, Protective
/// treats the tool region as part of the body.
enum class Mode { kEngage = 0, kProtective = 1 };

inline const char* mode_name(Mode m) {
  return m == Mode::kEngage ? "engage" : "protective";
}

}  // namespace reflex

#endif  // REFLEX_CORE_TOOL_REGION_HPP_
