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

#ifndef REFLEX_BENCH_IO_HPP_
#define REFLEX_BENCH_IO_HPP_

#include <string>

#include "reflex/world/voxel_grid.hpp"

namespace reflex::bench {

/// Writes a voxel grid as a small text header (magic, dims, origin,
/// resolution) followed by the cells as little-endian float32 in grid index
/// order (x fastest). The format is deliberately dumb so external tooling can
/// slurp it with a few lines of numpy.
void save_grid(const std::string& path, const world::VoxelGrid& grid);

world::VoxelGrid load_grid(const std::string& path);

}  // namespace reflex::bench

#endif  // REFLEX_BENCH_IO_HPP_
