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

#include "rolfor/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rolfor/errors.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

namespace {

constexpr double kDegrees = std::numbers::pi / 180.0;
// Formation slots on an arc in front of the basket.
constexpr std::array<double, kTeamSize> kSlotAngles = {-70.0, -35.0, 0.0, 35.0, 70.0};
constexpr double kSlotJitterDeg = 10.0;
constexpr double kMinRadius = 5.5;
constexpr double kMaxRadius = 8.0;
constexpr double kMinDriveStep = 0.5;  // meters per frame
constexpr double kMaxDriveStep = 1.0;
constexpr double kStopRadius = 1.2;    // drive ends this close to the basket
constexpr double kFormationFollow = 0.25;
constexpr double kWanderDecay = 0.8;
constexpr double kMaxDefenderOffset = 2.0;

Point clip(Point p) noexcept {
  return {std::clamp(p.x, 0.0, kCourtLength), std::clamp(p.y, 0.0, kCourtWidth)};
}

constexpr Point kBasket{kBasketX, kBasketY};

}  // namespace

Point marking_target(Point attacker) noexcept {
  return {0.5 * (attacker.x + kBasket.x), 0.5 * (attacker.y + kBasket.y)};
}

void validate(const SynthConfig& c) {
  if (c.n_sequences < 1) fail(ErrorKind::kConfig, "n_sequences must be >= 1");
  if (!(c.pass_probability >= 0.0 && c.pass_probability <= 1.0)) {
    fail(ErrorKind::kConfig, "pass_probability must lie in [0, 1]");
  }
  if (!(c.defender_gain >= 0.0 && c.defender_gain <= 1.0)) {
    fail(ErrorKind::kConfig, "defender_gain must lie in [0, 1]");
  }
  if (!(c.noise_sigma >= 0.0) || !std::isfinite(c.noise_sigma)) {
    fail(ErrorKind::kConfig, "noise_sigma must be >= 0");
  }
}

TrajectorySequence generate_sequence(const SynthConfig& config, std::size_t index) {
  Rng rng(mix_seed(config.seed, index));
  TrajectorySequence seq;
  char id[64];
  std::snprintf(id, sizeof id, "synth-%llu-%06zu", static_cast<unsigned long long>(config.seed), index);
  seq.sequence_id = id;

  std::array<std::size_t, kTeamSize> slot_of{0, 1, 2, 3, 4};
  rng.shuffle(std::span<std::size_t>(slot_of));

  std::array<Point, kTeamSize> anchor{};
  std::array<Point, kTeamSize> wander{};
  std::array<Point, kTeamSize> attacker{};
  std::array<Point, kTeamSize> defender{};
  for (std::size_t i = 0; i < kTeamSize; ++i) {
    const double angle = (kSlotAngles[slot_of[i]] + rng.uniform(-kSlotJitterDeg, kSlotJitterDeg)) * kDegrees;
    const double radius = rng.uniform(kMinRadius, kMaxRadius);
    anchor[i] = clip({kBasket.x - radius * std::cos(angle), kBasket.y + radius * std::sin(angle)});
    attacker[i] = anchor[i];
  }
  for (std::size_t i = 0; i < kTeamSize; ++i) {
    const Point target = marking_target(attacker[i]);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double offset = rng.uniform(0.0, kMaxDefenderOffset);
    defender[i] = clip({target.x + offset * std::cos(angle), target.y + offset * std::sin(angle)});
  }
  auto possessor = static_cast<std::size_t>(rng.below(kTeamSize));
  double drive_step = rng.uniform(kMinDriveStep, kMaxDriveStep);

  const double gain = config.defender_gain;
  const double sigma = config.noise_sigma;
  auto record = [&](std::size_t t) {
    for (std::size_t i = 0; i < kTeamSize; ++i) {
      seq.set(t, i, attacker[i]);
      seq.set(t, assigned_defender(i), defender[i]);
    }
    seq.set(t, kBallIndex, attacker[possessor]);
  };
  record(0);

  for (std::size_t t = 1; t < kTotalFrames; ++t) {
    if (rng.uniform() < config.pass_probability) {
      const auto pick = static_cast<std::size_t>(rng.below(kTeamSize - 1));
      anchor[possessor] = attacker[possessor];
      wander[possessor] = {};
      possessor = pick >= possessor ? pick + 1 : pick;
      drive_step = rng.uniform(kMinDriveStep, kMaxDriveStep);
    }

    // Ball handler drives at the basket and stops at the rim.
    Point& carrier = attacker[possessor];
    const double to_rim = distance(carrier, kBasket);
    const double step = std::clamp(to_rim - kStopRadius, 0.0, drive_step);
    Point move{};
    if (to_rim > 0.0) move = {step * (kBasket.x - carrier.x) / to_rim, step * (kBasket.y - carrier.y) / to_rim};
    carrier = clip({carrier.x + move.x, carrier.y + move.y});

    for (std::size_t i = 0; i < kTeamSize; ++i) {
      if (i == possessor) continue;
      anchor[i] = clip({anchor[i].x + kFormationFollow * move.x, anchor[i].y + kFormationFollow * move.y});
      wander[i] = {kWanderDecay * wander[i].x + rng.normal(0.0, sigma),
                   kWanderDecay * wander[i].y + rng.normal(0.0, sigma)};
      attacker[i] = clip({anchor[i].x + wander[i].x, anchor[i].y + wander[i].y});
    }
    for (std::size_t i = 0; i < kTeamSize; ++i) {
      const Point target = marking_target(attacker[i]);
      defender[i] = clip({(1.0 - gain) * defender[i].x + gain * target.x + rng.normal(0.0, sigma),
                          (1.0 - gain) * defender[i].y + gain * target.y + rng.normal(0.0, sigma)});
    }
    record(t);
  }
  return seq;
}

std::vector<TrajectorySequence> generate_synthetic(const SynthConfig& config) {
  validate(config);
  std::vector<TrajectorySequence> out;
  out.reserve(config.n_sequences);
  for (std::size_t i = 0; i < config.n_sequences; ++i) out.push_back(generate_sequence(config, i));
  return out;
}

}  // namespace rolfor
