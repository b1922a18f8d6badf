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

#include "rolfor/oracles.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rolfor/errors.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

const char* to_string(OrderingKind kind) noexcept {
  switch (kind) {
    case OrderingKind::kNone: return "none";
    case OrderingKind::kBallDistance: return "ball_distance";
    case OrderingKind::kBallDistanceMarking: return "ball_distance_marking";
    case OrderingKind::kOracularFuture: return "oracular_future";
  }
  return "?";
}

OrderingKind ordering_from_string(std::string_view text) {
  if (text == "none") return OrderingKind::kNone;
  if (text == "ball_distance") return OrderingKind::kBallDistance;
  if (text == "ball_distance_marking") return OrderingKind::kBallDistanceMarking;
  if (text == "oracular_future") return OrderingKind::kOracularFuture;
  fail(ErrorKind::kConfig, "unknown ordering '" + std::string(text) + "'");
}

OrderingSpec OrderingSpec::make(OrderingKind kind, std::uint64_t seed) {
  OrderingSpec spec;
  spec.kind = kind;
  spec.reference_frame =
      kind == OrderingKind::kOracularFuture ? ReferenceFrame::kLastFuture : ReferenceFrame::kLastObserved;
  spec.seed = seed;
  return spec;
}

void validate(const OrderingSpec& spec) {
  const bool future = spec.reference_frame == ReferenceFrame::kLastFuture;
  if ((spec.kind == OrderingKind::kOracularFuture) != future) {
    fail(ErrorKind::kConfig, std::string("ordering '") + to_string(spec.kind) +
                                 "' is incompatible with the requested reference frame");
  }
}

std::vector<double> euclidean_distances_to_ball(const TrajectorySequence& seq, std::size_t frame) {
  if (frame >= seq.frame_count()) {
    fail(ErrorKind::kBounds, "frame " + std::to_string(frame) + " out of range for sequence '" + seq.sequence_id +
                                 "' with " + std::to_string(seq.frame_count()) + " frames");
  }
  const Point ball = seq.at(frame, kBallIndex);
  std::vector<double> d(kPlayers);
  for (std::size_t p = 0; p < kPlayers; ++p) d[p] = distance(seq.at(frame, p), ball);
  return d;
}

std::size_t reference_frame_index(const OrderingSpec& spec, const TrajectorySequence& seq) {
  if (spec.reference_frame == ReferenceFrame::kLastFuture) {
    if (seq.frame_count() < kTotalFrames) {
      fail(ErrorKind::kData, "sequence '" + seq.sequence_id + "' has no future frames for the oracular ordering");
    }
    return kTotalFrames - 1;
  }
  return kObsFrames - 1;
}

namespace {

std::vector<std::size_t> ascending(std::vector<std::size_t> idx, const std::vector<double>& key) {
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return idx;
}

}  // namespace

std::vector<std::size_t> order_players(const OrderingSpec& spec, const TrajectorySequence& seq) {
  validate(spec);
  if (spec.kind == OrderingKind::kNone) {
    std::vector<std::size_t> order(kPlayers);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(spec.seed, fnv1a(seq.sequence_id)));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
  }

  const std::size_t frame = reference_frame_index(spec, seq);
  const auto dist = euclidean_distances_to_ball(seq, frame);
  if (spec.kind == OrderingKind::kBallDistance) {
    std::vector<std::size_t> all(kPlayers);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return ascending(std::move(all), dist);
  }

  std::vector<std::size_t> attackers(kTeamSize);
  std::iota(attackers.begin(), attackers.end(), std::size_t{0});
  attackers = ascending(std::move(attackers), dist);

  // Greedy marking: each attacker, nearest to the ball first, takes the
  // nearest defender not yet assigned.
  std::vector<bool> taken(kTeamSize, false);
  std::vector<std::size_t> order;
  order.reserve(kPlayers);
  for (std::size_t a : attackers) {
    const Point pa = seq.at(frame, a);
    std::size_t best = kTeamSize;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kTeamSize; ++j) {
      if (taken[j]) continue;
      const double d = distance(pa, seq.at(frame, kTeamSize + j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    taken[best] = true;
    order.push_back(a);
    order.push_back(kTeamSize + best);
  }
  return order;
}

bool is_permutation(const std::vector<std::size_t>& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto v : order) {
    if (v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace rolfor
