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

#include <gtest/gtest.h>

#include <cmath>

#include "rolfor/errors.hpp"
#include "rolfor/oracles.hpp"
#include "rolfor/synth.hpp"

namespace rolfor {
namespace {

// Every frame holds the same layout.
TrajectorySequence static_sequence(const std::array<Point, kAgents>& at) {
  TrajectorySequence s;
  s.sequence_id = "static";
  for (std::size_t t = 0; t < kTotalFrames; ++t)
    for (std::size_t a = 0; a < kAgents; ++a) s.set(t, a, at[a]);
  return s;
}

std::vector<TrajectorySequence> synth(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.n_sequences = n;
  c.seed = seed;
  return generate_synthetic(c);
}

TEST(Distances, ThreeFourFive) {
  std::array<Point, kAgents> at{};
  for (auto& p : at) p = {20, 10};
  at[kBallIndex] = {1, 1};
  at[0] = {4, 5};
  at[1] = {1, 1};
  const auto d = euclidean_distances_to_ball(static_sequence(at), 4);
  EXPECT_DOUBLE_EQ(d[0], 5.0);
  EXPECT_DOUBLE_EQ(d[1], 0.0);
}

TEST(Distances, MatchesIndependentRecomputation) {
  for (const auto& s : synth(50, 1)) {
    for (std::size_t f : {0u, 4u, 14u}) {
      const auto d = euclidean_distances_to_ball(s, f);
      for (std::size_t p = 0; p < kPlayers; ++p) {
        const double dx = s.frames(f, p, 0) - s.frames(f, kBallIndex, 0);
        const double dy = s.frames(f, p, 1) - s.frames(f, kBallIndex, 1);
        EXPECT_NEAR(d[p], std::sqrt(dx * dx + dy * dy), 1e-12);
      }
    }
  }
}

TEST(Distances, FrameOutOfRange) {
  const auto s = synth(1, 1)[0];
  try {
    (void)euclidean_distances_to_ball(s, 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBounds);
  }
}

TEST(OrderPlayers, BallDistanceSortsAscending) {
  std::array<Point, kAgents> at{};
  at[kBallIndex] = {0, 0};
  const double dist[] = {5, 2, 9, 10, 11, 12, 13, 14, 15, 16};
  for (std::size_t p = 0; p < kPlayers; ++p) at[p] = {dist[p], 0};
  const auto order = order_players(OrderingSpec::make(OrderingKind::kBallDistance), static_sequence(at));
  EXPECT_EQ((std::vector<std::size_t>(order.begin(), order.begin() + 3)), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(OrderPlayers, MarkingPairsAttackersWithDefenders) {
  // attackers 0 (d=2) and 1 (d=5) nearest the ball; defender 5 next to 0,
  // defender 6 next to 1; the rest far away along the baseline.
  std::array<Point, kAgents> at{};
  at[kBallIndex] = {10, 7};
  at[0] = {12, 7};
  at[1] = {15, 7};
  at[5] = {12, 7.5};
  at[6] = {15, 7.5};
  for (std::size_t i = 2; i < 5; ++i) {
    at[i] = {20.0 + 2.0 * i, 1};
    at[i + 5] = {20.0 + 2.0 * i, 1.5};
  }
  const auto order = order_players(OrderingSpec::make(OrderingKind::kBallDistanceMarking), static_sequence(at));
  EXPECT_EQ((std::vector<std::size_t>(order.begin(), order.begin() + 4)), (std::vector<std::size_t>{0, 5, 1, 6}));
}

TEST(OrderPlayers, GreedyWhenBothAttackersPreferSameDefender) {
  // defender 5 is nearest to both attackers; attacker 0 (closer to ball)
  // takes it and attacker 1 falls back to defender 6.
  std::array<Point, kAgents> at{};
  at[kBallIndex] = {10, 7};
  at[0] = {11, 7};
  at[1] = {13, 7};
  at[5] = {12, 7};
  at[6] = {16, 7};
  for (std::size_t i = 2; i < 5; ++i) {
    at[i] = {20.0 + 2.0 * i, 1};
    at[i + 5] = {20.0 + 2.0 * i, 14};
  }
  const auto order = order_players(OrderingSpec::make(OrderingKind::kBallDistanceMarking), static_sequence(at));
  EXPECT_EQ(order[0], 0u);
  EXPECT_EQ(order[1], 5u);
  EXPECT_EQ(order[2], 1u);
  EXPECT_EQ(order[3], 6u);
}

TEST(OrderPlayers, PropertiesOnSyntheticData) {
  for (const auto& s : synth(200, 2)) {
    for (auto kind : {OrderingKind::kNone, OrderingKind::kBallDistance, OrderingKind::kBallDistanceMarking,
                      OrderingKind::kOracularFuture}) {
      const auto spec = OrderingSpec::make(kind, 3);
      const auto order = order_players(spec, s);
      ASSERT_TRUE(is_permutation(order, kPlayers));
      if (kind == OrderingKind::kBallDistance) {
        const auto d = euclidean_distances_to_ball(s, kObsFrames - 1);
        for (std::size_t k = 0; k + 1 < kPlayers; ++k) EXPECT_LE(d[order[k]], d[order[k + 1]]);
      }
      if (kind == OrderingKind::kBallDistanceMarking || kind == OrderingKind::kOracularFuture) {
        for (std::size_t k = 0; k < kPlayers; ++k) EXPECT_EQ(canonical_role(order[k]) == AgentRole::kAttacker, k % 2 == 0);
        if (kind == OrderingKind::kOracularFuture) {
          const auto d = euclidean_distances_to_ball(s, kTotalFrames - 1);
          for (std::size_t k = 0; k + 2 < kPlayers; k += 2) EXPECT_LE(d[order[k]], d[order[k + 2]]);
        }
      }
    }
  }
}

TEST(OrderPlayers, ScaleInvariant) {
  for (const auto& s : synth(50, 3)) {
    TrajectorySequence scaled = s;
    for (double& v : scaled.frames.data()) v *= 0.5;
    for (auto kind : {OrderingKind::kBallDistance, OrderingKind::kBallDistanceMarking, OrderingKind::kOracularFuture}) {
      const auto spec = OrderingSpec::make(kind);
      EXPECT_EQ(order_players(spec, s), order_players(spec, scaled));
    }
  }
}

TEST(OrderPlayers, RandomOrderSeededPerSequence) {
  const auto seqs = synth(20, 4);
  const auto spec = OrderingSpec::make(OrderingKind::kNone, 9);
  EXPECT_EQ(order_players(spec, seqs[0]), order_players(spec, seqs[0]));
  bool differs = false;
  for (std::size_t i = 1; i < seqs.size(); ++i) differs |= order_players(spec, seqs[i]) != order_players(spec, seqs[0]);
  EXPECT_TRUE(differs);
}

TEST(OrderPlayers, MarkingRecoversPlantedPairs) {
  std::size_t hits = 0, total = 0;
  for (const auto& s : synth(300, 5)) {
    const auto order = order_players(OrderingSpec::make(OrderingKind::kBallDistanceMarking), s);
    for (std::size_t k = 0; k < kPlayers; k += 2, ++total) hits += order[k + 1] == assigned_defender(order[k]);
  }
  EXPECT_GE(static_cast<double>(hits) / total, 0.9);
}

TEST(OrderingSpec, ParseAndValidate) {
  EXPECT_EQ(ordering_from_string("oracular_future"), OrderingKind::kOracularFuture);
  EXPECT_THROW(ordering_from_string("alphabetical"), Error);
  OrderingSpec bad = OrderingSpec::make(OrderingKind::kBallDistance);
  bad.reference_frame = ReferenceFrame::kLastFuture;
  EXPECT_THROW(validate(bad), Error);
}

TEST(IsPermutation, Checks) {
  EXPECT_TRUE(is_permutation({2, 0, 1}, 3));
  EXPECT_FALSE(is_permutation({2, 2, 1}, 3));
  EXPECT_FALSE(is_permutation({0, 1}, 3));
  EXPECT_FALSE(is_permutation({0, 1, 3}, 3));
}

}  // namespace
}  // namespace rolfor
