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

#ifndef REFLEX_NETCORE_CHECKPOINT_HPP_
#define REFLEX_NETCORE_CHECKPOINT_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflex/netcore/layers.hpp"
#include "reflex/netcore/tensor.hpp"

namespace reflex::net {

/// One named tensor inside a checkpoint file. Payload is float32.
struct CheckpointEntry {
  std::string name;
  std::vector<int> dims;
  std::vector<float> data;
};

/// Binary checkpoint: magic, version, tensor table, raw little-endian f32
/// payloads. Saving the result of a load reproduces the file byte-exactly.
void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> load_checkpoint(const std::string& path);

/// Snapshot of a parameter group, names taken from the ParamRefs.
template <typename T>
inline std::vector<CheckpointEntry> snapshot_params(
    const std::vector<ParamRef<T>>& params) {
  std::vector<CheckpointEntry> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    CheckpointEntry e;
    e.name = p.name;
    e.dims = p.tensor->dims;
    e.data.resize(p.tensor->numel());
    for (std::size_t i = 0; i < e.data.size(); ++i)
      e.data[i] = static_cast<float>(p.tensor->values[i]);
    out.push_back(std::move(e));
  }
  return out;
}

/// Restores a parameter group by name. Every parameter must be present with
/// matching dims; extra entries in the file are ignored.
template <typename T>
inline void restore_params(const std::vector<CheckpointEntry>& entries,
                           const std::vector<ParamRef<T>>& params) {
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint: missing tensor " + p.name);
    const CheckpointEntry& e = *it->second;
    if (e.dims != p.tensor->dims)
      throw std::runtime_error("checkpoint: dim mismatch for " + p.name);
    for (std::size_t i = 0; i < e.data.size(); ++i)
      p.tensor->values[i] = static_cast<T>(e.data[i]);
  }
}

template <typename T>
inline void save_params(const std::string& path,
                        const std::vector<ParamRef<T>>& params) {
  save_checkpoint(path, snapshot_params(params));
}

template <typename T>
inline void load_params(const std::string& path,
                        const std::vector<ParamRef<T>>& params) {
  restore_params(load_checkpoint(path), params);
}

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_CHECKPOINT_HPP_
