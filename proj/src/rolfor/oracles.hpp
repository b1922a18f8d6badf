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
#include <string>
#include <string_view>
#include <vector>

#include "rolfor/sequence.hpp"

namespace rolfor {

enum class OrderingKind { kNone, kBallDistance, kBallDistanceMarking, kOracularFuture };
enum class ReferenceFrame { kLastObserved, kLastFuture };

const char* to_string(OrderingKind kind) noexcept;
OrderingKind ordering_from_string(std::string_view text);

struct OrderingSpec {
  OrderingKind kind = OrderingKind::kNone;
  ReferenceFrame reference_frame = ReferenceFrame::kLastObserved;
  std::uint64_t seed = 0;  // only used by kNone

  // Pairs the kind with its reference frame (future only for the oracular kind).
  static OrderingSpec make(OrderingKind kind, std::uint64_t seed = 0);
};

void validate(const OrderingSpec& spec);

std::vector<double> euclidean_distances_to_ball(const TrajectorySequence& seq, std::size_t frame);

/// Permutation of player indices 0-9; element k is the player put in slot k.
/// kNone draws a random permutation keyed by (seed, sequence_id).
std::vector<std::size_t> order_players(const OrderingSpec& spec, const TrajectorySequence& seq);

// Frame index used for distances under the spec.
std::size_t reference_frame_index(const OrderingSpec& spec, const TrajectorySequence& seq);

bool is_permutation(const std::vector<std::size_t>& order, std::size_t n);

}  // namespace rolfor
