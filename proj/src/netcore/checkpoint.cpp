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

#include "reflex/netcore/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace reflex::net {
namespace {

constexpr char kMagic[8] = {'R', 'F', 'L', 'X', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f32(std::ostream& os, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  write_u32(os, u);
}

float read_f32(std::istream& is) {
  const std::uint32_t u = read_u32(is);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointEntry>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for write");
  os.write(kMagic, 8);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    write_u32(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_u32(os, static_cast<std::uint32_t>(e.dims.size()));
    std::size_t n = 1;
    for (int d : e.dims) {
      if (d <= 0) throw std::runtime_error("checkpoint: bad dims for " + e.name);
      write_u32(os, static_cast<std::uint32_t>(d));
      n *= static_cast<std::size_t>(d);
    }
    if (n != e.data.size())
      throw std::runtime_error("checkpoint: payload size mismatch for " + e.name);
    for (float f : e.data) write_f32(os, f);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::vector<CheckpointEntry> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  const std::uint32_t count = read_u32(is);
  std::vector<CheckpointEntry> entries(count);
  for (auto& e : entries) {
    const std::uint32_t name_len = read_u32(is);
    e.name.resize(name_len);
    is.read(e.name.data(), name_len);
    const std::uint32_t ndims = read_u32(is);
    e.dims.resize(ndims);
    std::size_t n = 1;
    for (auto& d : e.dims) {
      d = static_cast<int>(read_u32(is));
      n *= static_cast<std::size_t>(d);
    }
    e.data.resize(n);
    for (auto& f : e.data) f = read_f32(is);
    if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
  }
  return entries;
}

}  // namespace reflex::net
