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

#include "rolfor/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "rolfor/errors.hpp"
#include "rolfor/oracles.hpp"

namespace rolfor {

namespace {

void check_forecast_shapes(const Tensor& pred, const Tensor& gt, const char* what) {
  if (pred.rank() != 3 || pred.dim(2) != 2) {
    fail(ErrorKind::kDimension, std::string(what) + ": expected [K, P, 2], got " + pred.shape_string());
  }
  require_same_shape(pred, gt, what);
}

double mean_distance(const Tensor& pred, const Tensor& gt, std::size_t first_frame) {
  const std::size_t frames = pred.dim(0), players = pred.dim(1);
  double total = 0.0;
  for (std::size_t k = first_frame; k < frames; ++k)
    for (std::size_t p = 0; p < players; ++p) {
      const double dx = pred(k, p, 0) - gt(k, p, 0);
      const double dy = pred(k, p, 1) - gt(k, p, 1);
      total += std::sqrt(dx * dx + dy * dy);
    }
  return total / static_cast<double>((frames - first_frame) * players);
}

}  // namespace

double ade(const Tensor& pred, const Tensor& gt) {
  check_forecast_shapes(pred, gt, "ade");
  return mean_distance(pred, gt, 0);
}

double fde(const Tensor& pred, const Tensor& gt) {
  check_forecast_shapes(pred, gt, "fde");
  return mean_distance(pred, gt, pred.dim(0) - 1);
}

double topk_ordering_accuracy(std::span<const std::size_t> pred_order, std::span<const std::size_t> true_order,
                              std::size_t k) {
  const std::vector<std::size_t> p(pred_order.begin(), pred_order.end());
  const std::vector<std::size_t> t(true_order.begin(), true_order.end());
  if (!is_permutation(p, p.size()) || !is_permutation(t, p.size())) {
    fail(ErrorKind::kValidation, "top-k accuracy needs two permutations of the same players");
  }
  if (k < 1 || k > p.size()) {
    fail(ErrorKind::kValidation, "top-k: k=" + std::to_string(k) + " outside [1, " + std::to_string(p.size()) + "]");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += p[i] == t[i];
  return static_cast<double>(hits) / static_cast<double>(k);
}

void ForecastErrors::add(double seq_ade, double seq_fde) {
  per_sequence_ade.push_back(seq_ade);
  per_sequence_fde.push_back(seq_fde);
}

void ForecastErrors::finalize() {
  ade = fde = 0.0;
  if (per_sequence_ade.empty()) return;
  for (double v : per_sequence_ade) ade += v;
  for (double v : per_sequence_fde) fde += v;
  ade /= static_cast<double>(per_sequence_ade.size());
  fde /= static_cast<double>(per_sequence_fde.size());
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

std::string metrics_csv_header() { return "run_id,variant,ordering,ade,fde,topk1,topk3,topk5,topk10,seed"; }

std::string to_csv_line(const MetricsRow& row) {
  std::string line = row.run_id + "," + row.variant + "," + row.ordering + "," + format_double(row.ade) + "," +
                     format_double(row.fde);
  for (double v : row.topk) line += "," + format_double(v);
  line += "," + std::to_string(row.seed);
  return line;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = metrics_csv_header() + "\n";
  for (const auto& row : rows) out += to_csv_line(row) + "\n";
  return out;
}

}  // namespace rolfor
