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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rolfor/checkpoint.hpp"
#include "rolfor/config.hpp"
#include "rolfor/metrics.hpp"
#include "rolfor/perturb.hpp"
#include "rolfor/sequence.hpp"

namespace rolfor {

/// Mean squared coordinate error over [K, 10, 2].
double forecast_loss(const Tensor& pred, const Tensor& gt);
/// 2 (pred - gt) / N
Tensor forecast_loss_backward(const Tensor& pred, const Tensor& gt);

// Player future positions [K, 10, 2] of a sequence.
Tensor future_players(const TrajectorySequence& seq);

/// Worker count: ROLFOR_THREADS if set, else the hardware concurrency.
std::size_t worker_count();
/// Runs f(i) for i in [0, n) across workers. Callers write results into
/// per-index slots so the outcome does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

using ProgressFn = std::function<void(const std::string&)>;

struct PretrainResult {
  ScoreNetwork net;
  std::vector<double> loss_history;  // per epoch, (m / kScoreFeatureScale)^2
  double heldout_mse_m2 = 0.0;
  double heldout_top1 = 0.0;
  double heldout_top10 = 0.0;
};

/// Trains the score network to regress each player's distance to the ball at
/// the last observed frame (target divided by kScoreFeatureScale).
PretrainResult pretrain_dist_estimator(const ExperimentConfig& config, std::span<const TrajectorySequence> train,
                                       std::span<const TrajectorySequence> heldout, const ProgressFn& progress = {});
/// Held-out regression error (m^2) and ordering accuracy of an estimator.
void score_estimator(const ScoreNetwork& net, std::span<const TrajectorySequence> seqs, PretrainResult& out);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> history;
  bool pretrained = false;
  PretrainResult pretrain;
};

TrainResult train(const ExperimentConfig& config, std::span<const TrajectorySequence> train_set,
                  const ProgressFn& progress = {});

std::string history_csv(std::span<const EpochStats> history);

bool uses_soft_ordering(Variant v) noexcept;

/// Fixed ordering a trained model applies to a sequence (not for e2e variants).
std::vector<std::size_t> model_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq);
/// Ordering the top-k metrics compare against: the clean oracle ordering for
/// oracle models, the ball-distance ordering otherwise.
std::vector<std::size_t> reference_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq);
/// Ordering the model actually uses for a sequence (argsort of scores for e2e variants).
std::vector<std::size_t> predicted_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq);

/// Forecast [K, 10, 2] in meters, optionally with a replacement ordering.
Tensor predict(const Checkpoint& ckpt, const TrajectorySequence& seq, const std::vector<std::size_t>* order = nullptr);

struct EvalResult {
  ForecastErrors errors;
  double topk[4] = {0.0, 0.0, 0.0, 0.0};
};

/// ADE/FDE and top-k accuracy over seqs. A perturbation, when given, corrupts
/// the fixed ordering of each sequence (child rng keyed by sequence id).
EvalResult evaluate(const Checkpoint& ckpt, std::span<const TrajectorySequence> seqs,
                    const PerturbSpec* perturb = nullptr);

MetricsRow metrics_row(const Checkpoint& ckpt, const EvalResult& result, const std::string& variant_label);

struct ProbeRow {
  double epsilon = 0.0;
  double ordernn_grad_norm = 0.0;
  double gcn_grad_norm = 0.0;
  double pooled_fraction = 0.0;
};

/// One forward/backward through the soft ordering path per epsilon, summed
/// over the batch.
std::vector<ProbeRow> gradient_probe(const Checkpoint& ckpt, std::span<const TrajectorySequence> batch,
                                     std::span<const double> epsilons);
std::string probe_csv(std::span<const ProbeRow> rows);

}  // namespace rolfor
