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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rolfor/tensor.hpp"

namespace rolfor {

// Fixed agent layout: attackers 0-4, defenders 5-9, ball 10.
inline constexpr std::size_t kAgents = 11;
inline constexpr std::size_t kPlayers = 10;
inline constexpr std::size_t kTeamSize = 5;
inline constexpr std::size_t kBallIndex = 10;
inline constexpr std::size_t kObsFrames = 5;
inline constexpr std::size_t kFutFrames = 10;
inline constexpr std::size_t kTotalFrames = kObsFrames + kFutFrames;

// NBA court (94 x 50 ft) in meters; the attacking basket sits on the right.
inline constexpr double kCourtLength = 28.65;
inline constexpr double kCourtWidth = 15.24;
inline constexpr double kBasketX = 26.75;
inline constexpr double kBasketY = 7.62;
inline constexpr double kFrameInterval = 0.4;

enum class AgentRole { kAttacker, kDefender, kBall };

const char* to_string(AgentRole role) noexcept;
AgentRole role_from_string(const std::string& text);
AgentRole canonical_role(std::size_t agent) noexcept;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b) noexcept;

struct TrajectorySequence {
  std::string sequence_id;
  Tensor frames{Shape{kTotalFrames, kAgents, 2}};  // [T+K, A, 2], meters
  std::array<AgentRole, kAgents> roles{};
  double frame_interval = kFrameInterval;

  TrajectorySequence();

  std::size_t frame_count() const { return frames.dim(0); }
  Point at(std::size_t frame, std::size_t agent) const {
    return {frames(frame, agent, 0), frames(frame, agent, 1)};
  }
  void set(std::size_t frame, std::size_t agent, Point p) {
    frames(frame, agent, 0) = p.x;
    frames(frame, agent, 1) = p.y;
  }
  // [kObsFrames, kAgents, 2]
  Tensor observed() const;
  // [kFutFrames, kAgents, 2]
  Tensor future() const;

  friend bool operator==(const TrajectorySequence& a, const TrajectorySequence& b) {
    return a.sequence_id == b.sequence_id && a.frames == b.frames && a.roles == b.roles &&
           a.frame_interval == b.frame_interval;
  }
};

/// Throws a validation error naming the sequence and the violated rule.
void validate(const TrajectorySequence& seq);

std::string to_json_line(const TrajectorySequence& seq);
TrajectorySequence from_json_line(const std::string& line);

std::vector<TrajectorySequence> load_sequences(const std::filesystem::path& path);
void save_sequences(std::span<const TrajectorySequence> seqs, const std::filesystem::path& path);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t split_seed = 0;
};

// Split proportions follow the 60708 / 15244 / 19050 partition.
DatasetSplit split_dataset(std::span<const TrajectorySequence> seqs, std::uint64_t seed);

}  // namespace rolfor
