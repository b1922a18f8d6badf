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

#include "rolfor/oracles.hpp"
#include "rolfor/rolegcn.hpp"

namespace rolfor {

enum class Variant { kNone, kOracle, kEuclDistEst, kE2e, kE2eFinetune };
enum class OutputMode { kAbsolute, kOffset };

const char* to_string(Variant v) noexcept;
Variant variant_from_string(std::string_view text);
const char* to_string(OutputMode m) noexcept;
OutputMode output_mode_from_string(std::string_view text);

struct ModelConfig {
  std::vector<std::size_t> gcn_widths{32, 64};
  std::size_t decoder_hidden = 32;
  std::size_t kernel = 3;
  // Offset mode predicts displacements from the last observed position.
  OutputMode output_mode = OutputMode::kAbsolute;
  AdjacencyConfig adjacency;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ExperimentConfig {
  Variant variant = Variant::kOracle;
  OrderingKind ordering = OrderingKind::kBallDistanceMarking;  // oracle variant only
  double epsilon = 1.0;
  double scale = 0.1;
  bool normalize_permutation = true;
  ModelConfig model;

  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.002;
  double momentum = 0.9;
  double clip_norm = 10.0;  // global gradient-norm clip on the batch mean; 0 disables
  std::uint64_t seed = 0;

  // Distance-estimator pretraining (eucl_dist_est without an init checkpoint).
  std::size_t pretrain_epochs = 60;
  double pretrain_learning_rate = 0.05;

  std::string train_path;
  std::string test_path;
  std::string init_checkpoint;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void validate(const ExperimentConfig& config);

std::string to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and invalid values are
/// config errors.
ExperimentConfig config_from_json(std::string_view text);

/// Deterministic identifier derived from the configuration contents.
std::string config_run_id(const ExperimentConfig& config);

}  // namespace rolfor
