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
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "rolfor/checkpoint.hpp"
#include "rolfor/config.hpp"
#include "rolfor/errors.hpp"
#include "rolfor/gradcheck.hpp"
#include "rolfor/model.hpp"
#include "rolfor/synth.hpp"
#include "rolfor/trainer.hpp"
#include "support/ops.hpp"

namespace rolfor {
namespace {

namespace fs = std::filesystem;

std::vector<TrajectorySequence> synth(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.n_sequences = n;
  c.seed = seed;
  return generate_synthetic(c);
}

ExperimentConfig small_config(Variant v) {
  ExperimentConfig c;
  c.variant = v;
  c.ordering = v == Variant::kOracle ? OrderingKind::kBallDistanceMarking : OrderingKind::kNone;
  c.model.gcn_widths = {8, 8};
  c.model.decoder_hidden = 8;
  c.epochs = 2;
  c.batch_size = 4;
  c.seed = 1;
  c.pretrain_epochs = 2;
  return c;
}

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rolfor_unit";
  fs::create_directories(dir);
  return dir / name;
}

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("ROLFOR_THREADS")) saved_ = old;
    setenv("ROLFOR_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (saved_.empty()) {
      unsetenv("ROLFOR_THREADS");
    } else {
      setenv("ROLFOR_THREADS", saved_.c_str(), 1);
    }
  }

 private:
  std::string saved_;
};

TEST(ForecastLoss, Examples) {
  Tensor gt(Shape{10, 10, 2});
  for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = 0.01 * static_cast<double>(i);
  EXPECT_EQ(forecast_loss(gt, gt), 0.0);
  Tensor pred = gt;
  for (std::size_t i = 0; i < pred.size(); i += 2) {
    pred[i] += 3.0;
    pred[i + 1] += 4.0;
  }
  EXPECT_NEAR(forecast_loss(pred, gt), 12.5, 1e-12);
  EXPECT_THROW(forecast_loss(pred, Tensor(Shape{10, 9, 2})), Error);
}

TEST(ForecastLoss, GradientMatchesFiniteDifferences) {
  const DifferentiableOp op = testing::forecast_loss_op();
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor a(Shape{3, 2, 2}), b(Shape{3, 2, 2});
    for (double& v : a.data()) v = rng.uniform(-2, 2);
    for (double& v : b.data()) v = rng.uniform(-2, 2);
    const Tensor in[] = {a, b};
    ASSERT_TRUE(check_gradients(op, in, 1e-8).passed);
  }
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_config(Variant::kE2e);
  c.epsilon = 0.25;
  c.model.adjacency = {6, 0.4, 0.1};
  c.model.output_mode = OutputMode::kOffset;
  c.train_path = "a.jsonl";
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_EQ(config_run_id(c), config_run_id(config_from_json(to_json(c))));
  ExperimentConfig d = c;
  d.seed = 2;
  EXPECT_NE(config_run_id(c), config_run_id(d));
}

TEST(Config, Validation) {
  EXPECT_THROW(config_from_json(R"({"variant":"e2e_finetune"})"), Error);
  EXPECT_THROW(config_from_json(R"({"variant":"oracle","ordering":"none"})"), Error);
  EXPECT_THROW(config_from_json(R"({"colour":"red"})"), Error);
  EXPECT_THROW(config_from_json(R"({"epochs":"many"})"), Error);
  EXPECT_THROW(config_from_json("not json"), Error);
  EXPECT_THROW(config_from_json(R"({"adjacency":9})"), Error);
  EXPECT_THROW(config_from_json(R"({"kernel":4})"), Error);
  EXPECT_NO_THROW(config_from_json(R"({"variant":"e2e_finetune","init_checkpoint":"x.ckpt"})"));
  try {
    config_from_json(R"({"variant":"e2e_finetune"})");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Checkpoint, BitExactRoundTrip) {
  for (int variant : {1, 3, 5, 6, 8}) {
    ExperimentConfig c = small_config(Variant::kOracle);
    c.model.adjacency.variant = variant;
    c.epochs = 1;
    auto result = train(c, synth(8, 2));
    const auto path = temp_path("rt.ckpt");
    save_checkpoint(result.checkpoint, path);
    const Checkpoint back = load_checkpoint(path);
    EXPECT_TRUE(back == result.checkpoint);
    EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(result.checkpoint));
  }
}

TEST(Checkpoint, RejectsCorruptFiles) {
  auto result = train(small_config(Variant::kOracle), synth(4, 2));
  const std::string bytes = serialize_checkpoint(result.checkpoint);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_THROW(deserialize_checkpoint("XXXXXXXX" + bytes.substr(8)), Error);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), Error);
  EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt")), Error);
}

TEST(Train, DeterministicAcrossRunsAndWorkerCounts) {
  const auto data = synth(24, 3);
  for (Variant v : {Variant::kNone, Variant::kOracle, Variant::kE2e}) {
    const ExperimentConfig c = small_config(v);
    std::string one, four, again;
    {
      ThreadsEnv env("1");
      one = serialize_checkpoint(train(c, data).checkpoint);
    }
    {
      ThreadsEnv env("4");
      four = serialize_checkpoint(train(c, data).checkpoint);
      again = serialize_checkpoint(train(c, data).checkpoint);
    }
    EXPECT_EQ(one, four) << to_string(v);
    EXPECT_EQ(four, again) << to_string(v);
  }
}

TEST(Train, ZeroLearningRateKeepsWeights) {
  ExperimentConfig c = small_config(Variant::kE2e);
  c.learning_rate = 0.0;
  const auto result = train(c, synth(8, 4));
  Rng init_rng(mix_seed(c.seed, 0x1217));
  RolFor fresh = RolFor::initialized(c.model, init_rng);
  EXPECT_TRUE(result.checkpoint.model == fresh);
}

TEST(Train, OracleNeverTouchesScoreNetwork) {
  ExperimentConfig c = small_config(Variant::kOracle);
  const auto data = synth(4, 5);
  Rng rng(1);
  RolFor model = RolFor::initialized(c.model, rng);
  ForwardCache cache;
  const Tensor pred = forward_fixed(model, data[0].observed(), order_players(OrderingSpec::make(c.ordering), data[0]),
                                    &cache);
  ModelGrads g = ModelGrads::zeros_like(model);
  model_backward(model, cache, forecast_loss_backward(pred, future_players(data[0])), g);
  g.score.for_each_param([](const std::string&, const Tensor& t) {
    for (double v : t.data()) EXPECT_EQ(v, 0.0);
  });
  const auto result = train(c, data);
  Rng init_rng(mix_seed(c.seed, 0x1217));
  EXPECT_TRUE(result.checkpoint.model.score == RolFor::initialized(c.model, init_rng).score);
}

TEST(Train, EmptyDataAndMissingInit) {
  EXPECT_THROW(train(small_config(Variant::kOracle), {}), Error);
  ExperimentConfig c = small_config(Variant::kE2eFinetune);
  c.init_checkpoint = temp_path("no_such.ckpt").string();
  try {
    train(c, synth(2, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Train, FinetuneRequiresEstimatorCheckpoint) {
  const auto data = synth(8, 6);
  const auto oracle = train(small_config(Variant::kOracle), data);
  const auto path = temp_path("oracle_init.ckpt");
  save_checkpoint(oracle.checkpoint, path);
  ExperimentConfig c = small_config(Variant::kE2eFinetune);
  c.init_checkpoint = path.string();
  EXPECT_THROW(train(c, data), Error);

  const auto est = train(small_config(Variant::kEuclDistEst), data);
  EXPECT_TRUE(est.pretrained);
  save_checkpoint(est.checkpoint, path);
  c.epochs = 0;
  const auto ft = train(c, data);
  EXPECT_TRUE(ft.checkpoint.model.score == est.checkpoint.model.score);
}

TEST(Train, OracleLossDecreasesEarly) {
  ExperimentConfig c = small_config(Variant::kOracle);
  c.model = ModelConfig{};
  c.epochs = 5;
  c.batch_size = 32;
  const auto result = train(c, synth(400, 7));
  ASSERT_EQ(result.history.size(), 5u);
  for (const auto& e : result.history) EXPECT_TRUE(std::isfinite(e.loss));
  // two-epoch moving average
  for (std::size_t i = 2; i < 5; ++i) {
    const double prev = 0.5 * (result.history[i - 2].loss + result.history[i - 1].loss);
    const double cur = 0.5 * (result.history[i - 1].loss + result.history[i].loss);
    EXPECT_LE(cur, prev);
  }
  EXPECT_LT(result.history.back().loss, result.history.front().loss);
}

// Ten-sequence overfit: every variant except e2e gets below 5% of its
// initial loss within 500 epochs.
TEST(Train, OverfitTenSequences) {
  const auto data = synth(10, 8);
  const auto est_path = temp_path("overfit_est.ckpt");
  for (Variant v : {Variant::kNone, Variant::kOracle, Variant::kEuclDistEst, Variant::kE2eFinetune}) {
    ExperimentConfig c;
    c.variant = v;
    c.ordering = v == Variant::kOracle ? OrderingKind::kBallDistanceMarking : OrderingKind::kNone;
    c.epochs = 500;
    c.batch_size = 2;
    c.seed = 3;
    c.pretrain_epochs = 100;
    if (v == Variant::kE2eFinetune) c.init_checkpoint = est_path.string();
    const auto result = train(c, data);
    if (v == Variant::kEuclDistEst) save_checkpoint(result.checkpoint, est_path);
    const double first = result.history.front().loss, last = result.history.back().loss;
    EXPECT_LT(last, 0.05 * first) << to_string(v) << " " << first << " -> " << last;
  }
}

TEST(Pretrain, ZeroEpochsReturnsInitialization) {
  ExperimentConfig c = small_config(Variant::kEuclDistEst);
  c.pretrain_epochs = 0;
  const auto data = synth(6, 9);
  const auto r = pretrain_dist_estimator(c, data, data);
  Rng init_rng(mix_seed(c.seed, 0x5c0e));
  EXPECT_TRUE(r.net == ScoreNetwork::initialized(init_rng));
  EXPECT_THROW(pretrain_dist_estimator(c, {}, data), Error);
}

TEST(Pretrain, LearnsDistances) {
  ExperimentConfig c = small_config(Variant::kEuclDistEst);
  c.pretrain_epochs = 30;
  const auto train_set = synth(300, 10), held = synth(100, 11);
  const auto r = pretrain_dist_estimator(c, train_set, held);
  ASSERT_EQ(r.loss_history.size(), 30u);
  EXPECT_LT(r.loss_history.back(), r.loss_history.front());
  EXPECT_TRUE(std::isfinite(r.heldout_mse_m2));
}

TEST(Evaluate, MetricsAndPerturbationRows) {
  const auto data = synth(12, 12);
  const auto result = train(small_config(Variant::kOracle), data);
  const auto clean = evaluate(result.checkpoint, data);
  EXPECT_EQ(clean.errors.per_sequence_ade.size(), 12u);
  EXPECT_EQ(clean.topk[3], 1.0);
  const auto spec = parse_perturb_spec("light_swap");
  const auto noisy = evaluate(result.checkpoint, data, &spec);
  EXPECT_NEAR(noisy.topk[3], 0.8, 1e-12);
  const auto again = evaluate(result.checkpoint, data, &spec);
  EXPECT_EQ(noisy.errors.ade, again.errors.ade);
}

TEST(Evaluate, PerturbationNeedsFixedOrdering) {
  const auto data = synth(6, 13);
  const auto result = train(small_config(Variant::kE2e), data);
  const auto spec = parse_perturb_spec("light_swap");
  EXPECT_THROW(evaluate(result.checkpoint, data, &spec), Error);
  EXPECT_NO_THROW(evaluate(result.checkpoint, data));
}

Checkpoint untrained_e2e(const std::vector<TrajectorySequence>& data) {
  ExperimentConfig c = small_config(Variant::kE2e);
  c.model = ModelConfig{};
  c.epochs = 0;
  return train(c, data).checkpoint;
}

TEST(GradientProbe, PoolingLimitsAndDeterminism) {
  const auto data = synth(16, 14);
  const auto ckpt = untrained_e2e(data);
  const double eps[] = {1e-6, 1e-2, 1.0, 100.0, 1e6};
  const auto rows = gradient_probe(ckpt, data, eps);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].pooled_fraction, 0.0);
  EXPECT_EQ(rows[4].pooled_fraction, 1.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].pooled_fraction, rows[i - 1].pooled_fraction);
  EXPECT_GT(rows[4].gcn_grad_norm, 0.0);
  EXPECT_EQ(probe_csv(rows), probe_csv(gradient_probe(ckpt, data, eps)));
  EXPECT_EQ(probe_csv(rows).substr(0, probe_csv(rows).find('\n')),
            "epsilon,ordernn_grad_norm,gcn_grad_norm,pooled_fraction");
}

// Past full pooling the score gradient falls off exactly as 1/epsilon.
TEST(GradientProbe, ScoreGradientDecaysInverseEpsilon) {
  const auto data = synth(16, 14);
  const auto ckpt = untrained_e2e(data);
  const double eps[] = {1e5, 1e6, 1e7};
  const auto rows = gradient_probe(ckpt, data, eps);
  EXPECT_NEAR(rows[0].ordernn_grad_norm / rows[1].ordernn_grad_norm, 10.0, 1e-3);
  EXPECT_NEAR(rows[1].ordernn_grad_norm / rows[2].ordernn_grad_norm, 10.0, 1e-3);
}

TEST(GradientProbe, CentroidScoreGradientBelowGcnGradient) {
  const auto data = synth(16, 14);
  const auto ckpt = untrained_e2e(data);
  const double eps[] = {1e6};
  const auto rows = gradient_probe(ckpt, data, eps);
  RecordProperty("ordernn_grad_norm", std::to_string(rows[0].ordernn_grad_norm));
  RecordProperty("gcn_grad_norm", std::to_string(rows[0].gcn_grad_norm));
  EXPECT_LT(rows[0].ordernn_grad_norm, 1e-6 * rows[0].gcn_grad_norm);
}

// Whole-model gradient through the soft ordering path on tiny widths. A
// shared shift of all scores leaves soft ranks unchanged, so score.b2 has an
// identically zero gradient; it is held fixed and checked separately.
TEST(Model, SoftPathGradientCheck) {
  ModelConfig mc;
  mc.gcn_widths = {3, 4};
  mc.decoder_hidden = 3;
  const auto data = synth(3, 15);
  for (int variant : {3, 5}) {
    mc.adjacency = {variant, 0.7, 0.0};
    Rng rng(16);
    const RolFor base = RolFor::initialized(mc, rng);
    std::vector<Tensor> params;
    {
      RolFor m = base;
      ModelGrads g = ModelGrads::zeros_like(m);
      for_each_trainable(m, g, true, [&](const std::string& name, Tensor& p, Tensor&) {
        if (name != "score.b2") params.push_back(p);
      });
    }
    for (const auto& seq : data) {
      const Tensor x = seq.observed(), gt = future_players(seq);
      const SoftRankSettings settings{2.0, 0.7, true};
      auto unpack = [base](std::span<const Tensor> in) {
        RolFor m = base;
        ModelGrads g = ModelGrads::zeros_like(m);
        std::size_t k = 0;
        for_each_trainable(m, g, true, [&](const std::string& name, Tensor& p, Tensor&) {
          if (name != "score.b2") p = in[k++];
        });
        m.materialize();
        return m;
      };
      DifferentiableOp op;
      op.name = "model";
      op.forward = [=](std::span<const Tensor> in) {
        return std::vector<Tensor>{Tensor::scalar(forecast_loss(forward_soft(unpack(in), x, settings), gt))};
      };
      op.backward = [=](std::span<const Tensor> in, std::span<const Tensor> cot) {
        RolFor m = unpack(in);
        ForwardCache cache;
        const Tensor pred = forward_soft(m, x, settings, &cache);
        Tensor d = forecast_loss_backward(pred, gt);
        for (double& v : d.data()) v *= cot[0][0];
        ModelGrads g = ModelGrads::zeros_like(m);
        model_backward(m, cache, d, g);
        std::vector<Tensor> out;
        for_each_trainable(m, g, true, [&](const std::string& name, Tensor&, Tensor& gt_) {
          if (name != "score.b2") out.push_back(gt_);
        });
        return out;
      };
      op.kink_distance = [=](std::span<const Tensor> in) {
        const RolFor m = unpack(in);
        const auto scores = score_players(m.score, x);
        return soft_rank_kink_distance(soft_rank(scores, settings.epsilon));
      };
      const auto report = check_gradients(op, params, 1e-4);
      EXPECT_TRUE(report.passed) << "variant " << variant << " " << report.worst();

      ForwardCache cache;
      const Tensor pred = forward_soft(base, x, settings, &cache);
      ModelGrads g = ModelGrads::zeros_like(base);
      model_backward(base, cache, forecast_loss_backward(pred, gt), g);
      double w2 = 0.0;
      for (double v : g.score.w2.data()) w2 = std::max(w2, std::abs(v));
      EXPECT_LT(std::abs(g.score.b2[0]), 1e-9 * std::max(1.0, w2));
    }
  }
}

TEST(Model, OffsetModeStartsFromLastObserved) {
  ModelConfig mc;
  mc.output_mode = OutputMode::kOffset;
  Rng rng(17);
  RolFor m = RolFor::initialized(mc, rng);
  m.decoder.conv1_w.fill(0.0);
  m.decoder.conv1_b.fill(0.0);
  const auto seq = synth(1, 18)[0];
  std::vector<std::size_t> order(10);
  std::iota(order.begin(), order.end(), 0);
  const Tensor pred = forward_fixed(m, seq.observed(), order);
  for (std::size_t k = 0; k < kFutFrames; ++k)
    for (std::size_t p = 0; p < kPlayers; ++p) {
      EXPECT_NEAR(pred(k, p, 0), seq.frames(kObsFrames - 1, p, 0), 1e-9);
      EXPECT_NEAR(pred(k, p, 1), seq.frames(kObsFrames - 1, p, 1), 1e-9);
    }
}

}  // namespace
}  // namespace rolfor
