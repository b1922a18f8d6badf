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
#include <span>
#include <string>
#include <vector>

#include "rolfor/config.hpp"
#include "rolfor/decoder.hpp"
#include "rolfor/ordernn.hpp"
#include "rolfor/rolegcn.hpp"
#include "rolfor/softsort.hpp"

namespace rolfor {

// Coordinates enter the network as (position - court center) / kPositionScale.
inline constexpr double kCenterX = 14.325;
inline constexpr double kCenterY = 7.62;
inline constexpr double kPositionScale = 10.0;

struct RolFor {
  ModelConfig config;
  ScoreNetwork score;
  std::vector<GcnLayer> gcn;
  TcnDecoder decoder;

  static RolFor initialized(const ModelConfig& config, Rng& rng);

  // Visits every stored tensor under a stable name, frozen ones included.
  template <typename F>
  void for_each_tensor(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_tensor(F&& f) const { visit(*this, f); }

  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    s.score.for_each_param(f);
    for (std::size_t l = 0; l < s.gcn.size(); ++l) {
      const std::string p = "gcn." + std::to_string(l) + ".";
      f(p + "spatial", s.gcn[l].adjacency.spatial);
      f(p + "temporal", s.gcn[l].adjacency.temporal);
      f(p + "alpha", s.gcn[l].adjacency.alpha);
      f(p + "beta", s.gcn[l].adjacency.beta);
      f(p + "weight", s.gcn[l].weight);
    }
    s.decoder.for_each_param(f);
  }

  // Rebuilds adjacency tensors that are functions of alpha/beta.
  void materialize();

  bool operator==(const RolFor& other) const;
};

struct ModelGrads {
  ScoreNetwork score;
  std::vector<GcnGrads> gcn;
  TcnDecoder decoder;

  static ModelGrads zeros_like(const RolFor& model);
  void add(const ModelGrads& other);
};

/// Calls f(name, param, grad) for every learnable tensor. Adjacency entries
/// are included only where the layer's variant makes them learnable; the
/// score network only when include_score is set.
template <typename F>
void for_each_trainable(RolFor& model, ModelGrads& grads, bool include_score, F&& f) {
  if (include_score) {
    f("score.w0", model.score.w0, grads.score.w0);
    f("score.b0", model.score.b0, grads.score.b0);
    f("score.w1", model.score.w1, grads.score.w1);
    f("score.b1", model.score.b1, grads.score.b1);
    f("score.w2", model.score.w2, grads.score.w2);
    f("score.b2", model.score.b2, grads.score.b2);
  }
  for (std::size_t l = 0; l < model.gcn.size(); ++l) {
    auto& adj = model.gcn[l].adjacency;
    auto& g = grads.gcn[l];
    const std::string p = "gcn." + std::to_string(l) + ".";
    if (has_full_adjacency(adj.config.variant)) {
      f(p + "spatial", adj.spatial, g.spatial);
      f(p + "temporal", adj.temporal, g.temporal);
    }
    if (has_alpha(adj.config.variant)) f(p + "alpha", adj.alpha, g.alpha);
    if (has_beta(adj.config.variant)) f(p + "beta", adj.beta, g.beta);
    f(p + "weight", model.gcn[l].weight, g.weight);
  }
  f("decoder.conv0_w", model.decoder.conv0_w, grads.decoder.conv0_w);
  f("decoder.conv0_b", model.decoder.conv0_b, grads.decoder.conv0_b);
  f("decoder.conv1_w", model.decoder.conv1_w, grads.decoder.conv1_w);
  f("decoder.conv1_b", model.decoder.conv1_b, grads.decoder.conv1_b);
  f("decoder.proj", model.decoder.proj, grads.decoder.proj);
}

struct SoftRankSettings {
  double epsilon = 1.0;
  double scale = 0.1;
  bool normalized = true;
};

struct ForwardCache {
  bool soft = false;
  Tensor x_norm;  // [T, A, 2]
  SoftPermutation m;
  GcnStackCache gcn;
  DecoderCache decoder;
  Tensor y_role;  // [K, A, 2] decoder output in role order
  ScoreCache score;
  std::vector<double> scores;
  SoftRankResult rank;
};

/// Forecast in meters for the players, [K, 10, 2], from observed frames
/// [T, A, 2] placed into role slots by a fixed ordering.
Tensor forward_fixed(const RolFor& model, const Tensor& x_obs, std::span<const std::size_t> order,
                     ForwardCache* cache = nullptr);
/// Same, with the ordering produced by scores -> soft ranks -> soft permutation.
Tensor forward_soft(const RolFor& model, const Tensor& x_obs, const SoftRankSettings& settings,
                    ForwardCache* cache = nullptr);
/// Accumulates gradients of the loss with respect to all parameters in the
/// forward graph, given d loss / d forecast.
void model_backward(const RolFor& model, const ForwardCache& cache, const Tensor& d_pred, ModelGrads& grads);

}  // namespace rolfor
