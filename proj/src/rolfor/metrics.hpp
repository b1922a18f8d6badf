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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rolfor/tensor.hpp"

namespace rolfor {

/// Mean Euclidean distance over all frames and players. pred, gt: [K, P, 2].
double ade(const Tensor& pred, const Tensor& gt);
/// Mean Euclidean distance over players at the final frame.
double fde(const Tensor& pred, const Tensor& gt);

/// Fraction of the first k slots whose predicted player matches.
double topk_ordering_accuracy(std::span<const std::size_t> pred_order, std::span<const std::size_t> true_order,
                              std::size_t k);

struct ForecastErrors {
  double ade = 0.0;
  double fde = 0.0;
  std::vector<double> per_sequence_ade;
  std::vector<double> per_sequence_fde;

  void add(double seq_ade, double seq_fde);
  // Recomputes the means from the per-sequence lists in order.
  void finalize();
};

inline constexpr std::size_t kTopkLevels[] = {1, 3, 5, 10};

struct MetricsRow {
  std::string run_id;
  std::string variant;
  std::string ordering;
  double ade = 0.0;
  double fde = 0.0;
  double topk[4] = {0.0, 0.0, 0.0, 0.0};
  std::uint64_t seed = 0;
};

std::string metrics_csv_header();
std::string to_csv_line(const MetricsRow& row);
std::string metrics_csv(std::span<const MetricsRow> rows);

// Fixed-precision rendering used by every CSV the library emits.
std::string format_double(double value);

}  // namespace rolfor
