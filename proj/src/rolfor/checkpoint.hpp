// Copyright 2026 The RolFor Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rolfor/config.hpp"
#include "rolfor/model.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ExperimentConfig config;
  RolFor model;
  std::uint64_t epoch = 0;
  Rng::State rng_state{};

  friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
    return a.config == b.config && a.model == b.model && a.epoch == b.epoch && a.rng_state == b.rng_state;
  }
};

// Layout: "RLFRCKPT", u32 version, u64 header length, JSON header (config,
// epoch, rng state), u32 tensor count, then per tensor: u32 name length, name,
// u32 rank, u64 dims, float64 payload. Integers and floats little-endian.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rolfor
