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

#include "reflex/bench/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "reflex/core/csv.hpp"

namespace reflex::bench {

namespace {
constexpr const char* kMagic = "reflexgrid";
constexpr int kVersion = 1;
}  // namespace

void save_grid(const std::string& path, const world::VoxelGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_grid: cannot open " + path);
  out << kMagic << ' ' << kVersion << '\n';
  out << "dims " << grid.dims[0] << ' ' << grid.dims[1] << ' ' << grid.dims[2]
      << '\n';
  out << "origin " << format_double(grid.origin.x()) << ' '
      << format_double(grid.origin.y()) << ' ' << format_double(grid.origin.z())
      << '\n';
  out << "resolution " << format_double(grid.resolution) << '\n';
  out << "data\n";
  std::vector<float> payload(grid.cells.begin(), grid.cells.end());
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw std::runtime_error("save_grid: write failed for " + path);
}

world::VoxelGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_grid: cannot open " + path);

  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic || version != kVersion) {
    throw std::runtime_error("load_grid: bad header in " + path);
  }

  std::string key;
  std::array<int, 3> dims{};
  Vec3 origin = Vec3::Zero();
  double resolution = 0.0;
  in >> key >> dims[0] >> dims[1] >> dims[2];
  if (key != "dims") throw std::runtime_error("load_grid: expected dims");
  in >> key >> origin.x() >> origin.y() >> origin.z();
  if (key != "origin") throw std::runtime_error("load_grid: expected origin");
  in >> key >> resolution;
  if (key != "resolution") {
    throw std::runtime_error("load_grid: expected resolution");
  }
  in >> key;
  if (key != "data") throw std::runtime_error("load_grid: expected data");
  in.ignore(1);  // the newline before the payload

  world::VoxelGrid grid(origin, resolution, dims, 0.0);
  std::vector<float> payload(grid.cells.size());
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (in.gcount() !=
      static_cast<std::streamsize>(payload.size() * sizeof(float))) {
    throw std::runtime_error("load_grid: truncated payload in " + path);
  }
  for (std::size_t i = 0; i < payload.size(); ++i) {
    grid.cells[i] = static_cast<double>(payload[i]);
  }
  return grid;
}

}  // namespace reflex::bench
