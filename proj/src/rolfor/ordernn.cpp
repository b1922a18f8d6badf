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

#include "rolfor/ordernn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rolfor/errors.hpp"
#include "rolfor/ops.hpp"

namespace rolfor {

namespace {

void init_uniform(Tensor& t, Rng& rng, double bound) {
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
}

// y[m, n] = x[m, k] * w[k, n] + b[n]
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = matmul(x, w);
  const std::size_t n = w.dim(1);
  for (std::size_t i = 0; i < out.dim(0); ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += b[j];
  return out;
}

void tanh_inplace(Tensor& t) {
  for (double& v : t.data()) v = std::tanh(v);
}

// Accumulates x^T * d into gw and column sums of d into gb; returns d * w^T.
Tensor affine_backward(const Tensor& x, const Tensor& w, const Tensor& d, Tensor& gw, Tensor& gb) {
  const std::size_t m = x.dim(0), k = x.dim(1), n = w.dim(1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      for (std::size_t j = 0; j < n; ++j) gw[p * n + j] += xv * d[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) gb[j] += d[i * n + j];
  }
  Tensor dx(Shape{m, k});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += d[i * n + j] * w[p * n + j];
      dx[i * k + p] = s;
    }
  return dx;
}

void tanh_backward_inplace(Tensor& d, const Tensor& activated) {
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - activated[i] * activated[i];
}

void require_square(const SoftPermutation& m, const char* what) {
  if (m.weights.rank() != 2 || m.weights.dim(0) != m.weights.dim(1)) {
    fail(ErrorKind::kDimension, std::string(what) + ": permutation must be square, got " + m.weights.shape_string());
  }
}

void require_agents(const SoftPermutation& m, const Tensor& x, const char* what) {
  require_square(m, what);
  if (x.rank() != 3 || x.dim(2) != 2 || x.dim(1) < m.weights.dim(0)) {
    fail(ErrorKind::kDimension, std::string(what) + ": permutation " + m.weights.shape_string() +
                                    " does not fit coordinates " + x.shape_string());
  }
}

}  // namespace

ScoreNetwork ScoreNetwork::initialized(Rng& rng) {
  ScoreNetwork net;
  init_uniform(net.w0, rng, 1.0 / std::sqrt(10.0));
  init_uniform(net.w1, rng, 1.0 / std::sqrt(32.0));
  init_uniform(net.w2, rng, 1.0 / std::sqrt(32.0));
  return net;
}

Tensor score_features(const Tensor& x_in) {
  if (x_in.rank() != 3 || x_in.dim(2) != 2 || x_in.dim(1) < 2) {
    fail(ErrorKind::kDimension, "score_features: expected [T, A, 2], got " + x_in.shape_string());
  }
  const std::size_t frames = x_in.dim(0), agents = x_in.dim(1), players = agents - 1, ball = agents - 1;
  Tensor f(Shape{players, frames * 2});
  for (std::size_t p = 0; p < players; ++p)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t d = 0; d < 2; ++d)
        f[p * frames * 2 + t * 2 + d] = (x_in(t, p, d) - x_in(t, ball, d)) / kScoreFeatureScale;
  return f;
}

std::vector<double> score_forward(const ScoreNetwork& net, const Tensor& features, ScoreCache* cache) {
  if (features.rank() != 2 || features.dim(1) != net.w0.dim(0)) {
    fail(ErrorKind::kDimension, "score_forward: features " + features.shape_string() + " do not match input width " +
                                    std::to_string(net.w0.dim(0)));
  }
  Tensor h0 = affine(features, net.w0, net.b0);
  tanh_inplace(h0);
  Tensor h1 = affine(h0, net.w1, net.b1);
  tanh_inplace(h1);
  const Tensor out = affine(h1, net.w2, net.b2);
  if (cache) {
    cache->input = features;
    cache->hidden0 = std::move(h0);
    cache->hidden1 = std::move(h1);
  }
  return out.values();
}

Tensor score_backward(const ScoreNetwork& net, const ScoreCache& cache, std::span<const double> d_scores,
                      ScoreNetwork& grad) {
  const std::size_t p = cache.input.dim(0);
  if (d_scores.size() != p) fail(ErrorKind::kDimension, "score_backward: cotangent length mismatch");
  const Tensor d_out(Shape{p, 1}, std::vector<double>(d_scores.begin(), d_scores.end()));
  Tensor d1 = affine_backward(cache.hidden1, net.w2, d_out, grad.w2, grad.b2);
  tanh_backward_inplace(d1, cache.hidden1);
  Tensor d0 = affine_backward(cache.hidden0, net.w1, d1, grad.w1, grad.b1);
  tanh_backward_inplace(d0, cache.hidden0);
  return affine_backward(cache.input, net.w0, d0, grad.w0, grad.b0);
}

std::vector<double> score_players(const ScoreNetwork& net, const Tensor& x_in) {
  return score_forward(net, score_features(x_in));
}

SoftPermutation build_soft_permutation(std::span<const double> ranks, double scale, bool normalized) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorKind::kDomain, "build_soft_permutation: scale must be positive, got " + std::to_string(scale));
  }
  const std::size_t n = ranks.size();
  if (n == 0) fail(ErrorKind::kSize, "build_soft_permutation: no ranks");
  SoftPermutation m{Tensor(Shape{n, n}), scale, normalized};
  std::vector<double> logits(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double slot = static_cast<double>(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = (slot - ranks[i]) / scale;
      logits[i] = -delta * delta;
    }
    double shift = 0.0;
    if (normalized) shift = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(logits[i] - shift);
      m.weights[k * n + i] = w;
      total += w;
    }
    if (normalized)
      for (std::size_t i = 0; i < n; ++i) m.weights[k * n + i] /= total;
  }
  return m;
}

std::vector<double> build_soft_permutation_backward(std::span<const double> ranks, const SoftPermutation& m,
                                                    const Tensor& d_weights) {
  const std::size_t n = ranks.size();
  require_shape(d_weights, Shape{n, n}, "build_soft_permutation_backward");
  require_shape(m.weights, Shape{n, n}, "build_soft_permutation_backward weights");
  std::vector<double> d_ranks(n, 0.0);
  const double inv_scale2 = 1.0 / (m.scale * m.scale);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = &m.weights[k * n];
    const double* drow = &d_weights[k * n];
    double row_dot = 0.0;
    if (m.normalized)
      for (std::size_t j = 0; j < n; ++j) row_dot += drow[j] * row[j];
    const double slot = static_cast<double>(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double d_logit = row[i] * (drow[i] - row_dot);
      d_ranks[i] += d_logit * 2.0 * (slot - ranks[i]) * inv_scale2;
    }
  }
  return d_ranks;
}

SoftPermutation permutation_matrix(std::span<const std::size_t> order) {
  const std::size_t n = order.size();
  if (n == 0) fail(ErrorKind::kSize, "permutation_matrix: empty order");
  std::vector<bool> seen(n, false);
  SoftPermutation m{Tensor(Shape{n, n}), 0.0, true};
  for (std::size_t k = 0; k < n; ++k) {
    if (order[k] >= n || seen[order[k]]) fail(ErrorKind::kValidation, "permutation_matrix: not a permutation");
    seen[order[k]] = true;
    m.weights[k * n + order[k]] = 1.0;
  }
  return m;
}

Tensor reshuffle(const SoftPermutation& m, const Tensor& x) {
  require_agents(m, x, "reshuffle");
  const std::size_t frames = x.dim(0), agents = x.dim(1), n = m.weights.dim(0);
  Tensor out = x;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = m.weights[k * n + i];
        sx += w * x[(t * agents + i) * 2];
        sy += w * x[(t * agents + i) * 2 + 1];
      }
      out[(t * agents + k) * 2] = sx;
      out[(t * agents + k) * 2 + 1] = sy;
    }
  }
  return out;
}

ShuffleGrads reshuffle_backward(const SoftPermutation& m, const Tensor& x, const Tensor& d_out) {
  require_agents(m, x, "reshuffle_backward");
  require_same_shape(x, d_out, "reshuffle_backward");
  const std::size_t frames = x.dim(0), agents = x.dim(1), n = m.weights.dim(0);
  ShuffleGrads g{Tensor(Shape{n, n}), d_out};
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < 2; ++d) g.d_input[(t * agents + i) * 2 + d] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double gx = d_out[(t * agents + k) * 2];
      const double gy = d_out[(t * agents + k) * 2 + 1];
      for (std::size_t i = 0; i < n; ++i) {
        const double w = m.weights[k * n + i];
        g.d_input[(t * agents + i) * 2] += w * gx;
        g.d_input[(t * agents + i) * 2 + 1] += w * gy;
        g.d_weights[k * n + i] += gx * x[(t * agents + i) * 2] + gy * x[(t * agents + i) * 2 + 1];
      }
    }
  }
  return g;
}

Tensor deshuffle(const SoftPermutation& m, const Tensor& y) {
  require_agents(m, y, "deshuffle");
  const std::size_t frames = y.dim(0), agents = y.dim(1), n = m.weights.dim(0);
  Tensor out = y;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double w = m.weights[k * n + i];
        sx += w * y[(t * agents + k) * 2];
        sy += w * y[(t * agents + k) * 2 + 1];
      }
      out[(t * agents + i) * 2] = sx;
      out[(t * agents + i) * 2 + 1] = sy;
    }
  }
  return out;
}

ShuffleGrads deshuffle_backward(const SoftPermutation& m, const Tensor& y, const Tensor& d_out) {
  require_agents(m, y, "deshuffle_backward");
  require_same_shape(y, d_out, "deshuffle_backward");
  const std::size_t frames = y.dim(0), agents = y.dim(1), n = m.weights.dim(0);
  ShuffleGrads g{Tensor(Shape{n, n}), d_out};
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = m.weights[k * n + i];
        const double ox = d_out[(t * agents + i) * 2];
        const double oy = d_out[(t * agents + i) * 2 + 1];
        gx += w * ox;
        gy += w * oy;
        g.d_weights[k * n + i] += ox * y[(t * agents + k) * 2] + oy * y[(t * agents + k) * 2 + 1];
      }
      g.d_input[(t * agents + k) * 2] = gx;
      g.d_input[(t * agents + k) * 2 + 1] = gy;
    }
  }
  return g;
}

std::vector<std::size_t> order_from_ranks(std::span<const double> ranks) {
  std::vector<std::size_t> order(ranks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
  return order;
}

}  // namespace rolfor
