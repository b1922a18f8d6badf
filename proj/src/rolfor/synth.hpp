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
#include <vector>

#include "rolfor/sequence.hpp"

namespace rolfor {

// Role-driven play simulator standing in for tracking data.
struct SynthConfig {
  std::size_t n_sequences = 2000;
  std::uint64_t seed = 0;
  double pass_probability = 0.08;  // per frame
  double defender_gain = 0.3;      // marking attraction strength
  double noise_sigma = 0.1;        // meters
};

void validate(const SynthConfig& config);

/// Defender 5+i marks attacker i. Each play: the ball possessor drives toward
/// the basket, off-ball attackers keep a spread formation that drifts with the
/// drive, defenders close on the midpoint between their attacker and the
/// basket, and the ball is passed with a per-frame probability.
std::vector<TrajectorySequence> generate_synthetic(const SynthConfig& config);

/// The single sequence with the given index; generate_synthetic is the
/// concatenation of these, so sequences can be produced in any order.
TrajectorySequence generate_sequence(const SynthConfig& config, std::size_t index);

inline constexpr std::size_t assigned_attacker(std::size_t defender) { return defender - kTeamSize; }
inline constexpr std::size_t assigned_defender(std::size_t attacker) { return attacker + kTeamSize; }

Point marking_target(Point attacker) noexcept;

}  // namespace rolfor
