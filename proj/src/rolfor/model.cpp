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

#include "rolfor/model.hpp"

#include "rolfor/errors.hpp"
#include "rolfor/sequence.hpp"

namespace rolfor {

RolFor RolFor::initialized(const ModelConfig& config, Rng& rng) {
  RolFor m;
  m.config = config;
  m.score = ScoreNetwork::initialized(rng);
  m.gcn = build_gcn_stack(config.adjacency, config.gcn_widths, kAgents, kObsFrames, rng);
  m.decoder = TcnDecoder::initialized(m.gcn.back().out_channels(), config.decoder_hidden, config.kernel, kObsFrames,
                                      kFutFrames, rng);
  return m;
}

void RolFor::materialize() {
  for (auto& layer : gcn) layer.adjacency.materialize();
}

bool RolFor::operator==(const RolFor& other) const {
  if (!(config == other.config) || !(score == other.score) || !(decoder == other.decoder)) return false;
  if (gcn.size() != other.gcn.size()) return false;
  for (std::size_t l = 0; l < gcn.size(); ++l) {
    const auto& a = gcn[l];
    const auto& b = other.gcn[l];
    if (!(a.weight == b.weight) || a.tanh_activation != b.tanh_activation) return false;
    if (!(a.adjacency.spatial == b.adjacency.spatial) || !(a.adjacency.temporal == b.adjacency.temporal) ||
        !(a.adjacency.alpha == b.adjacency.alpha) || !(a.adjacency.beta == b.adjacency.beta) ||
        !(a.adjacency.config == b.adjacency.config)) {
      return false;
    }
  }
  return true;
}

ModelGrads ModelGrads::zeros_like(const RolFor& model) {
  ModelGrads g;
  for (std::size_t l = 0; l < model.gcn.size(); ++l) g.gcn.push_back(GcnGrads::zeros_like(model.gcn[l]));
  g.decoder = TcnDecoder::zeros_like(model.decoder);
  return g;
}

namespace {

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor normalize_positions(const Tensor& x_obs) {
  Tensor x = x_obs;
  for (std::size_t i = 0; i < x.size(); i += 2) {
    x[i] = (x[i] - kCenterX) / kPositionScale;
    x[i + 1] = (x[i + 1] - kCenterY) / kPositionScale;
  }
  return x;
}

// [T, A, 2] -> [2, A, T] and back.
Tensor to_role_channels(const Tensor& x) {
  const std::size_t frames = x.dim(0), agents = x.dim(1);
  Tensor out(Shape{2, agents, frames});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t a = 0; a < agents; ++a)
      for (std::size_t d = 0; d < 2; ++d) out(d, a, t) = x(t, a, d);
  return out;
}

Tensor from_role_channels(const Tensor& h) {
  const std::size_t agents = h.dim(1), frames = h.dim(2);
  Tensor out(Shape{frames, agents, 2});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t a = 0; a < agents; ++a)
      for (std::size_t d = 0; d < 2; ++d) out(t, a, d) = h(d, a, t);
  return out;
}

void check_observed(const Tensor& x_obs) {
  require_shape(x_obs, Shape{kObsFrames, kAgents, 2}, "model input");
}

Tensor forward_with(const RolFor& model, const Tensor& x_norm, const SoftPermutation& m, ForwardCache* cache) {
  const Tensor role_in = to_role_channels(reshuffle(m, x_norm));
  const Tensor enc = rolegcn_forward(model.gcn, role_in, cache ? &cache->gcn : nullptr);
  Tensor y_role = decode(model.decoder, enc, cache ? &cache->decoder : nullptr);
  const Tensor y = deshuffle(m, y_role);

  const bool offset = model.config.output_mode == OutputMode::kOffset;
  Tensor pred(Shape{kFutFrames, kPlayers, 2});
  for (std::size_t k = 0; k < kFutFrames; ++k)
    for (std::size_t p = 0; p < kPlayers; ++p) {
      double vx = y(k, p, 0), vy = y(k, p, 1);
      if (offset) {
        vx += x_norm(kObsFrames - 1, p, 0);
        vy += x_norm(kObsFrames - 1, p, 1);
      }
      pred(k, p, 0) = vx * kPositionScale + kCenterX;
      pred(k, p, 1) = vy * kPositionScale + kCenterY;
    }
  if (cache) {
    cache->x_norm = x_norm;
    cache->m = m;
    cache->y_role = std::move(y_role);
  }
  return pred;
}

}  // namespace

void ModelGrads::add(const ModelGrads& o) {
  accumulate(score.w0, o.score.w0);
  accumulate(score.b0, o.score.b0);
  accumulate(score.w1, o.score.w1);
  accumulate(score.b1, o.score.b1);
  accumulate(score.w2, o.score.w2);
  accumulate(score.b2, o.score.b2);
  for (std::size_t l = 0; l < gcn.size(); ++l) {
    accumulate(gcn[l].spatial, o.gcn[l].spatial);
    accumulate(gcn[l].temporal, o.gcn[l].temporal);
    accumulate(gcn[l].alpha, o.gcn[l].alpha);
    accumulate(gcn[l].beta, o.gcn[l].beta);
    accumulate(gcn[l].weight, o.gcn[l].weight);
  }
  accumulate(decoder.conv0_w, o.decoder.conv0_w);
  accumulate(decoder.conv0_b, o.decoder.conv0_b);
  accumulate(decoder.conv1_w, o.decoder.conv1_w);
  accumulate(decoder.conv1_b, o.decoder.conv1_b);
  accumulate(decoder.proj, o.decoder.proj);
}

Tensor forward_fixed(const RolFor& model, const Tensor& x_obs, std::span<const std::size_t> order,
                     ForwardCache* cache) {
  check_observed(x_obs);
  if (order.size() != kPlayers) fail(ErrorKind::kDimension, "ordering must list the 10 players");
  if (cache) cache->soft = false;
  return forward_with(model, normalize_positions(x_obs), permutation_matrix(order), cache);
}

Tensor forward_soft(const RolFor& model, const Tensor& x_obs, const SoftRankSettings& settings,
                    ForwardCache* cache) {
  check_observed(x_obs);
  ScoreCache score_cache;
  std::vector<double> scores = score_forward(model.score, score_features(x_obs), &score_cache);
  SoftRankResult rank = soft_rank(scores, settings.epsilon);
  const SoftPermutation m = build_soft_permutation(rank.ranks, settings.scale, settings.normalized);
  Tensor pred = forward_with(model, normalize_positions(x_obs), m, cache);
  if (cache) {
    cache->soft = true;
    cache->score = std::move(score_cache);
    cache->scores = std::move(scores);
    cache->rank = std::move(rank);
  }
  return pred;
}

void model_backward(const RolFor& model, const ForwardCache& cache, const Tensor& d_pred, ModelGrads& grads) {
  require_shape(d_pred, Shape{kFutFrames, kPlayers, 2}, "model_backward");
  Tensor d_y(Shape{kFutFrames, kAgents, 2});
  for (std::size_t k = 0; k < kFutFrames; ++k)
    for (std::size_t p = 0; p < kPlayers; ++p)
      for (std::size_t d = 0; d < 2; ++d) d_y(k, p, d) = d_pred(k, p, d) * kPositionScale;

  ShuffleGrads de = deshuffle_backward(cache.m, cache.y_role, d_y);
  const Tensor d_enc = decode_backward(model.decoder, cache.decoder, de.d_input, grads.decoder);
  const Tensor d_role_in = rolegcn_backward(model.gcn, cache.gcn, d_enc, grads.gcn);
  if (!cache.soft) return;

  const ShuffleGrads re = reshuffle_backward(cache.m, cache.x_norm, from_role_channels(d_role_in));
  accumulate(de.d_weights, re.d_weights);
  const auto d_ranks = build_soft_permutation_backward(cache.rank.ranks, cache.m, de.d_weights);
  const auto d_scores = soft_rank_backward(cache.rank, d_ranks);
  score_backward(model.score, cache.score, d_scores, grads.score);
}

}  // namespace rolfor
