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

#include "rolfor/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "rolfor/errors.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

using nlohmann::json;

const char* to_string(AgentRole role) noexcept {
  switch (role) {
    case AgentRole::kAttacker: return "attacker";
    case AgentRole::kDefender: return "defender";
    case AgentRole::kBall: return "ball";
  }
  return "?";
}

AgentRole role_from_string(const std::string& text) {
  if (text == "attacker") return AgentRole::kAttacker;
  if (text == "defender") return AgentRole::kDefender;
  if (text == "ball") return AgentRole::kBall;
  fail(ErrorKind::kParse, "unknown agent role '" + text + "'");
}

AgentRole canonical_role(std::size_t agent) noexcept {
  if (agent < kTeamSize) return AgentRole::kAttacker;
  if (agent < kPlayers) return AgentRole::kDefender;
  return AgentRole::kBall;
}

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

TrajectorySequence::TrajectorySequence() {
  for (std::size_t a = 0; a < kAgents; ++a) roles[a] = canonical_role(a);
}

namespace {
Tensor frame_slice(const Tensor& frames, std::size_t begin, std::size_t count) {
  const std::size_t stride = kAgents * 2;
  std::vector<double> data(frames.values().begin() + static_cast<std::ptrdiff_t>(begin * stride),
                           frames.values().begin() + static_cast<std::ptrdiff_t>((begin + count) * stride));
  return Tensor(Shape{count, kAgents, 2}, std::move(data));
}
}  // namespace

Tensor TrajectorySequence::observed() const { return frame_slice(frames, 0, kObsFrames); }
Tensor TrajectorySequence::future() const { return frame_slice(frames, kObsFrames, kFutFrames); }

void validate(const TrajectorySequence& seq) {
  auto reject = [&](const std::string& rule) {
    fail(ErrorKind::kValidation, "sequence '" + seq.sequence_id + "': " + rule);
  };
  if (seq.frames.shape() != Shape{kTotalFrames, kAgents, 2}) {
    reject("frames must have shape " + shape_string({kTotalFrames, kAgents, 2}) + ", got " +
           seq.frames.shape_string());
  }
  for (std::size_t a = 0; a < kAgents; ++a) {
    if (seq.roles[a] != canonical_role(a)) {
      reject("agent " + std::to_string(a) + " must be " + to_string(canonical_role(a)) +
             " (attackers 0-4, defenders 5-9, ball 10)");
    }
  }
  if (!(seq.frame_interval > 0.0) || !std::isfinite(seq.frame_interval)) {
    reject("frame_interval must be a positive number");
  }
  for (std::size_t t = 0; t < kTotalFrames; ++t) {
    for (std::size_t a = 0; a < kAgents; ++a) {
      const Point p = seq.at(t, a);
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) reject("non-finite coordinate");
      if (p.x < 0.0 || p.x > kCourtLength || p.y < 0.0 || p.y > kCourtWidth) {
        reject("out of court bounds: agent " + std::to_string(a) + " frame " + std::to_string(t) + " at (" +
               json(p.x).dump() + ", " + json(p.y).dump() + ")");
      }
    }
  }
}

std::string to_json_line(const TrajectorySequence& seq) {
  json frames = json::array();
  for (std::size_t t = 0; t < seq.frame_count(); ++t) {
    json agents = json::array();
    for (std::size_t a = 0; a < kAgents; ++a) agents.push_back({seq.frames(t, a, 0), seq.frames(t, a, 1)});
    frames.push_back(std::move(agents));
  }
  json roles = json::array();
  for (auto r : seq.roles) roles.push_back(to_string(r));
  json obj;
  obj["sequence_id"] = seq.sequence_id;
  obj["frames"] = std::move(frames);
  obj["roles"] = std::move(roles);
  obj["frame_interval"] = seq.frame_interval;
  return obj.dump();
}

TrajectorySequence from_json_line(const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  TrajectorySequence seq;
  try {
    seq.sequence_id = obj.at("sequence_id").get<std::string>();
    const auto& frames = obj.at("frames");
    const auto& roles = obj.at("roles");
    if (!frames.is_array() || frames.size() != kTotalFrames) {
      fail(ErrorKind::kValidation,
           "sequence '" + seq.sequence_id + "': expected " + std::to_string(kTotalFrames) + " frames");
    }
    if (!roles.is_array() || roles.size() != kAgents) {
      fail(ErrorKind::kValidation,
           "sequence '" + seq.sequence_id + "': expected " + std::to_string(kAgents) + " roles");
    }
    for (std::size_t t = 0; t < kTotalFrames; ++t) {
      const auto& agents = frames[t];
      if (!agents.is_array() || agents.size() != kAgents) {
        fail(ErrorKind::kValidation, "sequence '" + seq.sequence_id + "': frame " + std::to_string(t) +
                                         " must list " + std::to_string(kAgents) + " agents");
      }
      for (std::size_t a = 0; a < kAgents; ++a) {
        const auto& xy = agents[a];
        if (!xy.is_array() || xy.size() != 2) fail(ErrorKind::kParse, "coordinate must be [x, y]");
        seq.frames(t, a, 0) = xy[0].get<double>();
        seq.frames(t, a, 1) = xy[1].get<double>();
      }
    }
    for (std::size_t a = 0; a < kAgents; ++a) seq.roles[a] = role_from_string(roles[a].get<std::string>());
    seq.frame_interval = obj.at("frame_interval").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  return seq;
}

std::vector<TrajectorySequence> load_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<TrajectorySequence> seqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TrajectorySequence seq;
    try {
      seq = from_json_line(line);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kParse) {
        fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      throw;
    }
    validate(seq);
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

void save_sequences(std::span<const TrajectorySequence> seqs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  for (const auto& s : seqs) out << to_json_line(s) << '\n';
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

DatasetSplit split_dataset(std::span<const TrajectorySequence> seqs, std::uint64_t seed) {
  const std::size_t n = seqs.size();
  if (n < 3) fail(ErrorKind::kSize, "split_dataset needs at least 3 sequences, got " + std::to_string(n));
  constexpr double kTotal = 60708.0 + 15244.0 + 19050.0;
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 60708.0 / kTotal));
  auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 15244.0 / kTotal));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
  n_val = std::clamp<std::size_t>(n_val, 1, n - n_train - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5917));
  rng.shuffle(std::span<std::size_t>(order));

  DatasetSplit split;
  split.split_seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = seqs[order[i]].sequence_id;
    if (i < n_train) {
      split.train.push_back(id);
    } else if (i < n_train + n_val) {
      split.val.push_back(id);
    } else {
      split.test.push_back(id);
    }
  }
  return split;
}

}  // namespace rolfor
