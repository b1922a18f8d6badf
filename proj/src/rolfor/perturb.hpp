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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rolfor/rng.hpp"

namespace rolfor {

enum class PerturbKind { kLightSwap, kLightInsert, kHeavySwap, kHeavyInsert };

const char* to_string(PerturbKind kind) noexcept;
PerturbKind perturb_kind_from_string(std::string_view text);

// One perturbation or a '+'-joined list applied in order.
struct PerturbSpec {
  std::vector<PerturbKind> kinds;
  double probability = 1.0;  // chance the whole list is applied to a sequence
  std::uint64_t seed = 0;

  std::string name() const;
};

void validate(const PerturbSpec& spec);
PerturbSpec parse_perturb_spec(std::string_view text, double probability = 1.0, std::uint64_t seed = 0);

// Displacement ranges, in slots.
inline constexpr std::size_t kLightMin = 1, kLightMax = 2;
inline constexpr std::size_t kHeavyMin = 3, kHeavyMax = 5;

/// Exchanges the entries at positions i and j.
std::vector<std::size_t> swap_positions(std::span<const std::size_t> order, std::size_t i, std::size_t j);
/// Removes the entry at `from` and reinserts it at from + displacement.
std::vector<std::size_t> insert_moved(std::span<const std::size_t> order, std::size_t from, std::ptrdiff_t displacement);

std::vector<std::size_t> apply_perturbation(PerturbKind kind, std::span<const std::size_t> order, Rng& rng);
std::vector<std::size_t> apply_perturbation(const PerturbSpec& spec, std::span<const std::size_t> order, Rng& rng);

}  // namespace rolfor
