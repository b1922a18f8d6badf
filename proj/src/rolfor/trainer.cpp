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

#include "rolfor/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "rolfor/errors.hpp"
#include "rolfor/oracles.hpp"

namespace rolfor {

double forecast_loss(const Tensor& pred, const Tensor& gt) {
  require_same_shape(pred, gt, "forecast_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

Tensor forecast_loss_backward(const Tensor& pred, const Tensor& gt) {
  require_same_shape(pred, gt, "forecast_loss_backward");
  Tensor g(pred.shape());
  const double c = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = c * (pred[i] - gt[i]);
  return g;
}

Tensor future_players(const TrajectorySequence& seq) {
  Tensor out(Shape{kFutFrames, kPlayers, 2});
  for (std::size_t k = 0; k < kFutFrames; ++k)
    for (std::size_t p = 0; p < kPlayers; ++p) {
      const Point q = seq.at(kObsFrames + k, p);
      out(k, p, 0) = q.x;
      out(k, p, 1) = q.y;
    }
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("ROLFOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto run = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        f(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

template <typename F>
void score_pairs(ScoreNetwork& p, ScoreNetwork& g, F&& f) {
  f(p.w0, g.w0);
  f(p.b0, g.b0);
  f(p.w1, g.w1);
  f(p.b1, g.b1);
  f(p.w2, g.w2);
  f(p.b2, g.b2);
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum, double grad_scale) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad_scale * grad[i];
    param[i] -= lr * velocity[i];
  }
}

std::vector<double> distance_targets(const TrajectorySequence& seq) {
  auto d = euclidean_distances_to_ball(seq, kObsFrames - 1);
  for (double& v : d) v /= kScoreFeatureScale;
  return d;
}

std::vector<std::size_t> ball_distance_order(const TrajectorySequence& seq) {
  return order_players(OrderingSpec::make(OrderingKind::kBallDistance), seq);
}

void report(const ProgressFn& progress, const std::string& line) {
  if (progress) progress(line);
}

}  // namespace

void score_estimator(const ScoreNetwork& net, std::span<const TrajectorySequence> seqs, PretrainResult& out) {
  out.heldout_mse_m2 = out.heldout_top1 = out.heldout_top10 = 0.0;
  if (seqs.empty()) return;
  std::vector<double> sq(seqs.size()), top1(seqs.size()), top10(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) {
    const auto pred = score_players(net, seqs[i].observed());
    const auto target = distance_targets(seqs[i]);
    double s = 0.0;
    for (std::size_t p = 0; p < kPlayers; ++p) {
      const double e = (pred[p] - target[p]) * kScoreFeatureScale;
      s += e * e;
    }
    sq[i] = s / static_cast<double>(kPlayers);
    const auto order = order_from_ranks(pred);
    const auto truth = ball_distance_order(seqs[i]);
    top1[i] = topk_ordering_accuracy(order, truth, 1);
    top10[i] = topk_ordering_accuracy(order, truth, kPlayers);
  });
  const double n = static_cast<double>(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out.heldout_mse_m2 += sq[i] / n;
    out.heldout_top1 += top1[i] / n;
    out.heldout_top10 += top10[i] / n;
  }
}

PretrainResult pretrain_dist_estimator(const ExperimentConfig& config, std::span<const TrajectorySequence> train,
                                       std::span<const TrajectorySequence> heldout, const ProgressFn& progress) {
  validate(config);
  if (train.empty()) fail(ErrorKind::kData, "distance-estimator pretraining needs at least one training sequence");
  Rng init_rng(mix_seed(config.seed, 0x5c0e));
  PretrainResult result;
  result.net = ScoreNetwork::initialized(init_rng);
  ScoreNetwork velocity;
  Rng batch_rng(mix_seed(config.seed, 0x9e7a));

  std::vector<Tensor> features(train.size());
  std::vector<std::vector<double>> targets(train.size());
  parallel_for(train.size(), [&](std::size_t i) {
    features[i] = score_features(train[i].observed());
    targets[i] = distance_targets(train[i]);
  });

  std::vector<std::size_t> index(train.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  const std::size_t batch = config.batch_size;
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    batch_rng.shuffle(std::span<std::size_t>(index));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < index.size(); start += batch) {
      const std::size_t count = std::min(batch, index.size() - start);
      std::vector<ScoreNetwork> grads(count);
      std::vector<double> losses(count);
      parallel_for(count, [&](std::size_t b) {
        const std::size_t i = index[start + b];
        ScoreCache cache;
        const auto pred = score_forward(result.net, features[i], &cache);
        std::vector<double> d(kPlayers);
        double loss = 0.0;
        for (std::size_t p = 0; p < kPlayers; ++p) {
          const double e = pred[p] - targets[i][p];
          loss += e * e;
          d[p] = 2.0 * e / static_cast<double>(kPlayers);
        }
        losses[b] = loss / static_cast<double>(kPlayers);
        score_backward(result.net, cache, d, grads[b]);
      });
      ScoreNetwork total;
      for (std::size_t b = 0; b < count; ++b) {
        epoch_loss += losses[b];
        score_pairs(total, grads[b], [](Tensor& t, Tensor& g) { add_into(t, g); });
      }
      const double inv = 1.0 / static_cast<double>(count);
      ScoreNetwork& net = result.net;
      // Pair params, grads and velocity by position in the fixed tensor list.
      std::vector<Tensor*> ps, gs, vs;
      score_pairs(net, total, [&](Tensor& p, Tensor& g) {
        ps.push_back(&p);
        gs.push_back(&g);
      });
      score_pairs(velocity, velocity, [&](Tensor& v, Tensor&) { vs.push_back(&v); });
      for (std::size_t k = 0; k < ps.size(); ++k)
        sgd_step(*ps[k], *gs[k], *vs[k], config.pretrain_learning_rate, config.momentum, inv);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(train.size()));
    report(progress, "pretrain epoch " + std::to_string(epoch + 1) + " loss " +
                         format_double(result.loss_history.back()));
  }
  score_estimator(result.net, heldout.empty() ? train : heldout, result);
  return result;
}

bool uses_soft_ordering(Variant v) noexcept { return v == Variant::kE2e || v == Variant::kE2eFinetune; }

std::vector<std::size_t> model_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq) {
  const auto& c = ckpt.config;
  switch (c.variant) {
    case Variant::kNone: return order_players(OrderingSpec::make(OrderingKind::kNone, c.seed), seq);
    case Variant::kOracle: return order_players(OrderingSpec::make(c.ordering), seq);
    case Variant::kEuclDistEst: {
      const auto scores = score_players(ckpt.model.score, seq.observed());
      return order_from_ranks(soft_rank(scores, 1e-6).ranks);
    }
    case Variant::kE2e:
    case Variant::kE2eFinetune: break;
  }
  fail(ErrorKind::kConfig, std::string("variant ") + to_string(c.variant) + " has no fixed ordering");
}

std::vector<std::size_t> reference_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq) {
  if (ckpt.config.variant == Variant::kOracle) return order_players(OrderingSpec::make(ckpt.config.ordering), seq);
  return ball_distance_order(seq);
}

std::vector<std::size_t> predicted_ordering(const Checkpoint& ckpt, const TrajectorySequence& seq) {
  if (uses_soft_ordering(ckpt.config.variant)) {
    return order_from_ranks(score_players(ckpt.model.score, seq.observed()));
  }
  return model_ordering(ckpt, seq);
}

namespace {

SoftRankSettings soft_settings(const ExperimentConfig& c) { return {c.epsilon, c.scale, c.normalize_permutation}; }

}  // namespace

Tensor predict(const Checkpoint& ckpt, const TrajectorySequence& seq, const std::vector<std::size_t>* order) {
  const Tensor x = seq.observed();
  if (order) return forward_fixed(ckpt.model, x, *order);
  if (uses_soft_ordering(ckpt.config.variant)) return forward_soft(ckpt.model, x, soft_settings(ckpt.config));
  return forward_fixed(ckpt.model, x, model_ordering(ckpt, seq));
}

TrainResult train(const ExperimentConfig& config, std::span<const TrajectorySequence> train_set,
                  const ProgressFn& progress) {
  validate(config);
  if (train_set.empty()) fail(ErrorKind::kData, "training needs at least one sequence");

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  ckpt.config = config;
  Rng init_rng(mix_seed(config.seed, 0x1217));
  ckpt.model = RolFor::initialized(config.model, init_rng);

  if (!config.init_checkpoint.empty() &&
      (config.variant == Variant::kEuclDistEst || config.variant == Variant::kE2eFinetune)) {
    const Checkpoint init = load_checkpoint(config.init_checkpoint);
    if (init.config.variant != Variant::kEuclDistEst) {
      fail(ErrorKind::kConfig, "init checkpoint '" + config.init_checkpoint + "' is a " +
                                   to_string(init.config.variant) + " model, expected eucl_dist_est");
    }
    ckpt.model.score = init.model.score;
  } else if (config.variant == Variant::kEuclDistEst) {
    result.pretrain = pretrain_dist_estimator(config, train_set, {}, progress);
    result.pretrained = true;
    ckpt.model.score = result.pretrain.net;
  }

  const bool soft = uses_soft_ordering(config.variant);
  std::vector<std::vector<std::size_t>> orders(train_set.size());
  if (!soft) parallel_for(train_set.size(), [&](std::size_t i) { orders[i] = model_ordering(ckpt, train_set[i]); });
  std::vector<Tensor> inputs(train_set.size()), targets(train_set.size());
  parallel_for(train_set.size(), [&](std::size_t i) {
    inputs[i] = train_set[i].observed();
    targets[i] = future_players(train_set[i]);
  });

  RolFor& model = ckpt.model;
  ModelGrads velocity = ModelGrads::zeros_like(model);
  const SoftRankSettings settings = soft_settings(config);
  Rng batch_rng(mix_seed(config.seed, 0xba7c));
  std::vector<std::size_t> index(train_set.size());
  std::iota(index.begin(), index.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    batch_rng.shuffle(std::span<std::size_t>(index));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < index.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, index.size() - start);
      std::vector<ModelGrads> grads(count);
      std::vector<double> losses(count);
      parallel_for(count, [&](std::size_t b) {
        const std::size_t i = index[start + b];
        ForwardCache cache;
        const Tensor pred = soft ? forward_soft(model, inputs[i], settings, &cache)
                                 : forward_fixed(model, inputs[i], orders[i], &cache);
        losses[b] = forecast_loss(pred, targets[i]);
        grads[b] = ModelGrads::zeros_like(model);
        model_backward(model, cache, forecast_loss_backward(pred, targets[i]), grads[b]);
      });
      for (std::size_t b = 1; b < count; ++b) grads[0].add(grads[b]);
      for (std::size_t b = 0; b < count; ++b) epoch_loss += losses[b];
      if (!std::isfinite(epoch_loss)) {
        fail(ErrorKind::kEvaluation, "training diverged (non-finite loss) in epoch " + std::to_string(epoch + 1));
      }

      double grad_scale = 1.0 / static_cast<double>(count);
      if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for_each_trainable(model, grads[0], soft, [&](const std::string&, Tensor&, Tensor& g) {
          for (double v : g.data()) sq += v * v;
        });
        const double norm = std::sqrt(sq) * grad_scale;
        if (norm > config.clip_norm) grad_scale *= config.clip_norm / norm;
      }
      std::vector<Tensor*> vs;
      for_each_trainable(model, velocity, soft, [&](const std::string&, Tensor&, Tensor& v) { vs.push_back(&v); });
      std::size_t k = 0;
      for_each_trainable(model, grads[0], soft, [&](const std::string&, Tensor& p, Tensor& g) {
        sgd_step(p, g, *vs[k++], config.learning_rate, config.momentum, grad_scale);
      });
      model.materialize();
    }
    result.history.push_back({epoch + 1, epoch_loss / static_cast<double>(train_set.size())});
    report(progress, "epoch " + std::to_string(epoch + 1) + " loss " + format_double(result.history.back().loss));
  }
  ckpt.epoch = config.epochs;
  ckpt.rng_state = batch_rng.state();
  return result;
}

std::string history_csv(std::span<const EpochStats> history) {
  std::string out = "epoch,loss\n";
  for (const auto& e : history) out += std::to_string(e.epoch) + "," + format_double(e.loss) + "\n";
  return out;
}

EvalResult evaluate(const Checkpoint& ckpt, std::span<const TrajectorySequence> seqs, const PerturbSpec* perturb) {
  if (seqs.empty()) fail(ErrorKind::kData, "evaluation needs at least one sequence");
  const bool soft = uses_soft_ordering(ckpt.config.variant);
  if (perturb && soft) {
    fail(ErrorKind::kConfig, "perturbations apply to fixed orderings; variant " +
                                 std::string(to_string(ckpt.config.variant)) + " orders players itself");
  }
  std::vector<double> ades(seqs.size()), fdes(seqs.size());
  std::vector<std::array<double, 4>> topk(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) {
    const auto& seq = seqs[i];
    std::vector<std::size_t> order = predicted_ordering(ckpt, seq);
    Tensor pred;
    if (perturb) {
      Rng rng(mix_seed(perturb->seed, fnv1a(seq.sequence_id)));
      order = apply_perturbation(*perturb, order, rng);
      pred = predict(ckpt, seq, &order);
    } else {
      pred = predict(ckpt, seq);
    }
    const Tensor gt = future_players(seq);
    ades[i] = ade(pred, gt);
    fdes[i] = fde(pred, gt);
    const auto truth = reference_ordering(ckpt, seq);
    for (std::size_t j = 0; j < 4; ++j) topk[i][j] = topk_ordering_accuracy(order, truth, kTopkLevels[j]);
  });
  EvalResult result;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    result.errors.add(ades[i], fdes[i]);
    for (std::size_t j = 0; j < 4; ++j) result.topk[j] += topk[i][j];
  }
  result.errors.finalize();
  for (double& v : result.topk) v /= static_cast<double>(seqs.size());
  return result;
}

MetricsRow metrics_row(const Checkpoint& ckpt, const EvalResult& result, const std::string& variant_label) {
  MetricsRow row;
  row.run_id = config_run_id(ckpt.config);
  row.variant = variant_label.empty() ? to_string(ckpt.config.variant) : variant_label;
  row.ordering = ckpt.config.variant == Variant::kOracle ? to_string(ckpt.config.ordering)
                                                         : to_string(ckpt.config.variant);
  row.ade = result.errors.ade;
  row.fde = result.errors.fde;
  for (std::size_t j = 0; j < 4; ++j) row.topk[j] = result.topk[j];
  row.seed = ckpt.config.seed;
  return row;
}

std::vector<ProbeRow> gradient_probe(const Checkpoint& ckpt, std::span<const TrajectorySequence> batch,
                                     std::span<const double> epsilons) {
  if (batch.empty()) fail(ErrorKind::kData, "gradient probe needs at least one sequence");
  std::vector<ProbeRow> rows;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) fail(ErrorKind::kConfig, "probe epsilons must be > 0");
    SoftRankSettings settings = soft_settings(ckpt.config);
    settings.epsilon = eps;
    std::vector<ModelGrads> grads(batch.size());
    std::vector<double> pooled(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
      ForwardCache cache;
      const Tensor pred = forward_soft(ckpt.model, batch[i].observed(), settings, &cache);
      const Tensor gt = future_players(batch[i]);
      grads[i] = ModelGrads::zeros_like(ckpt.model);
      model_backward(ckpt.model, cache, forecast_loss_backward(pred, gt), grads[i]);
      pooled[i] = pooled_fraction(cache.rank.blocks);
    });
    for (std::size_t i = 1; i < grads.size(); ++i) grads[0].add(grads[i]);
    ProbeRow row;
    row.epsilon = eps;
    double score_sq = 0.0, gcn_sq = 0.0;
    RolFor model = ckpt.model;
    for_each_trainable(model, grads[0], true, [&](const std::string& name, Tensor&, Tensor& g) {
      double s = 0.0;
      for (double v : g.data()) s += v * v;
      if (name.rfind("score.", 0) == 0) score_sq += s;
      if (name.rfind("gcn.", 0) == 0) gcn_sq += s;
    });
    row.ordernn_grad_norm = std::sqrt(score_sq);
    row.gcn_grad_norm = std::sqrt(gcn_sq);
    for (double p : pooled) row.pooled_fraction += p / static_cast<double>(batch.size());
    rows.push_back(row);
  }
  return rows;
}

std::string probe_csv(std::span<const ProbeRow> rows) {
  std::string out = "epsilon,ordernn_grad_norm,gcn_grad_norm,pooled_fraction\n";
  for (const auto& r : rows) {
    out += format_double(r.epsilon) + "," + format_double(r.ordernn_grad_norm) + "," +
           format_double(r.gcn_grad_norm) + "," + format_double(r.pooled_fraction) + "\n";
  }
  return out;
}

}  // namespace rolfor
