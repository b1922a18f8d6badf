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

#include "rolfor/rolegcn.hpp"

#include <cmath>

#include "rolfor/errors.hpp"

namespace rolfor {

void validate(const AdjacencyConfig& config) {
  if (config.variant < 1 || config.variant > 8) {
    fail(ErrorKind::kConfig, "unknown adjacency variant " + std::to_string(config.variant) + " (expected 1-8)");
  }
  if (!std::isfinite(config.alpha) || !std::isfinite(config.beta)) {
    fail(ErrorKind::kConfig, "adjacency alpha/beta must be finite");
  }
}

bool has_full_adjacency(int variant) { return variant == 3 || variant == 7 || variant == 8; }
bool has_alpha(int variant) { return variant >= 4 && variant <= 6; }
bool has_beta(int variant) { return variant == 6; }

std::size_t AdjacencyPair::learnable_count() const {
  if (has_full_adjacency(config.variant)) return spatial.size() + temporal.size();
  if (has_beta(config.variant)) return 2;
  if (has_alpha(config.variant)) return 1;
  return 0;
}

namespace {

void fill_diag_offdiag(Tensor& stack, double diag, double off) {
  const std::size_t count = stack.dim(0), n = stack.dim(1);
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) stack[(s * n + i) * n + j] = i == j ? diag : off;
}

// Sums of the diagonal and off-diagonal entries of a stack of square matrices.
std::pair<double, double> diag_offdiag_sums(const Tensor& stack) {
  const std::size_t count = stack.dim(0), n = stack.dim(1);
  double diag = 0.0, off = 0.0;
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += stack[(s * n + i) * n + j];
  return {diag, off};
}

}  // namespace

void AdjacencyPair::materialize() {
  const int v = config.variant;
  if (!has_alpha(v)) return;
  const double a = alpha[0];
  const double off = v == 4 ? 0.0 : (v == 5 ? 1.0 - a : beta[0]);
  fill_diag_offdiag(spatial, a, off);
  fill_diag_offdiag(temporal, a, off);
}

AdjacencyPair build_adjacency(const AdjacencyConfig& config, std::size_t roles, std::size_t frames, Rng& rng) {
  validate(config);
  AdjacencyPair adj;
  adj.config = config;
  adj.spatial = Tensor(Shape{frames, roles, roles});
  adj.temporal = Tensor(Shape{roles, frames, frames});
  switch (config.variant) {
    case 1:
      adj.spatial.fill(1.0);
      adj.temporal.fill(1.0);
      break;
    case 2:
      fill_diag_offdiag(adj.spatial, 1.0, 0.0);
      fill_diag_offdiag(adj.temporal, 1.0, 0.0);
      break;
    case 3:
    case 8: {
      const double bs = 1.0 / std::sqrt(static_cast<double>(roles));
      const double bt = 1.0 / std::sqrt(static_cast<double>(frames));
      for (double& v : adj.spatial.data()) v = rng.uniform(-bs, bs);
      for (double& v : adj.temporal.data()) v = rng.uniform(-bt, bt);
      break;
    }
    case 7: {
      const double ss = 1.0 / std::sqrt(static_cast<double>(roles));
      const double st = 1.0 / std::sqrt(static_cast<double>(frames));
      for (double& v : adj.spatial.data()) v = rng.normal(0.0, ss);
      for (double& v : adj.temporal.data()) v = rng.normal(0.0, st);
      break;
    }
    default:
      adj.alpha[0] = config.alpha;
      adj.beta[0] = config.beta;
      adj.materialize();
      break;
  }
  return adj;
}

GcnGrads GcnGrads::zeros_like(const GcnLayer& layer) {
  GcnGrads g;
  g.spatial = Tensor(layer.adjacency.spatial.shape());
  g.temporal = Tensor(layer.adjacency.temporal.shape());
  g.weight = Tensor(layer.weight.shape());
  return g;
}

namespace {

void check_layer_input(const GcnLayer& layer, const Tensor& h) {
  const auto& as = layer.adjacency.spatial;
  const auto& at = layer.adjacency.temporal;
  if (h.rank() != 3 || h.dim(0) != layer.in_channels() || h.dim(1) != at.dim(0) || h.dim(2) != as.dim(0)) {
    fail(ErrorKind::kDimension, "gcn layer: input " + h.shape_string() + " does not match weight " +
                                    layer.weight.shape_string() + ", spatial " + as.shape_string() +
                                    ", temporal " + at.shape_string());
  }
}

}  // namespace

Tensor gcn_layer_forward(const GcnLayer& layer, const Tensor& h, GcnCache* cache) {
  check_layer_input(layer, h);
  const std::size_t cin = h.dim(0), roles = h.dim(1), frames = h.dim(2), cout = layer.out_channels();
  const std::size_t rt = roles * frames;
  const Tensor& as = layer.adjacency.spatial;
  const Tensor& at = layer.adjacency.temporal;

  Tensor u(h.shape());
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t r = 0; r < roles; ++r) {
      const double* hin = &h[c * rt + r * frames];
      const double* a = &at[r * frames * frames];
      double* uo = &u[c * rt + r * frames];
      for (std::size_t t = 0; t < frames; ++t) {
        double s = 0.0;
        for (std::size_t tau = 0; tau < frames; ++tau) s += a[t * frames + tau] * hin[tau];
        uo[t] = s;
      }
    }

  Tensor v(h.shape());
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t t = 0; t < frames; ++t) {
      const double* a = &as[t * roles * roles];
      for (std::size_t r = 0; r < roles; ++r) {
        double s = 0.0;
        for (std::size_t q = 0; q < roles; ++q) s += a[r * roles + q] * u[c * rt + q * frames + t];
        v[c * rt + r * frames + t] = s;
      }
    }

  Tensor z(Shape{cout, roles, frames});
  for (std::size_t c = 0; c < cin; ++c) {
    const double* vc = &v[c * rt];
    for (std::size_t o = 0; o < cout; ++o) {
      const double w = layer.weight[c * cout + o];
      double* zo = &z[o * rt];
      for (std::size_t i = 0; i < rt; ++i) zo[i] += w * vc[i];
    }
  }
  if (layer.tanh_activation)
    for (double& x : z.data()) x = std::tanh(x);

  if (cache) {
    cache->input = h;
    cache->temporal = std::move(u);
    cache->spatial = std::move(v);
    cache->output = z;
  }
  return z;
}

Tensor gcn_layer_backward(const GcnLayer& layer, const GcnCache& cache, const Tensor& d_out, GcnGrads& grads) {
  require_same_shape(cache.output, d_out, "gcn_layer_backward");
  const Tensor& h = cache.input;
  const Tensor& u = cache.temporal;
  const Tensor& v = cache.spatial;
  const std::size_t cin = h.dim(0), roles = h.dim(1), frames = h.dim(2), cout = layer.out_channels();
  const std::size_t rt = roles * frames;
  const Tensor& as = layer.adjacency.spatial;
  const Tensor& at = layer.adjacency.temporal;
  const int variant = layer.adjacency.config.variant;
  const bool adj_grads = has_full_adjacency(variant) || has_alpha(variant);

  Tensor dz = d_out;
  if (layer.tanh_activation)
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= 1.0 - cache.output[i] * cache.output[i];

  Tensor dv(h.shape());
  for (std::size_t c = 0; c < cin; ++c) {
    const double* vc = &v[c * rt];
    double* dvc = &dv[c * rt];
    for (std::size_t o = 0; o < cout; ++o) {
      const double* dzo = &dz[o * rt];
      const double w = layer.weight[c * cout + o];
      double gw = 0.0;
      for (std::size_t i = 0; i < rt; ++i) {
        gw += vc[i] * dzo[i];
        dvc[i] += w * dzo[i];
      }
      grads.weight[c * cout + o] += gw;
    }
  }

  Tensor d_as(as.shape());
  Tensor du(h.shape());
  for (std::size_t t = 0; t < frames; ++t) {
    const double* a = &as[t * roles * roles];
    double* ga = &d_as[t * roles * roles];
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t r = 0; r < roles; ++r) {
        const double g = dv[c * rt + r * frames + t];
        for (std::size_t q = 0; q < roles; ++q) {
          if (adj_grads) ga[r * roles + q] += g * u[c * rt + q * frames + t];
          du[c * rt + q * frames + t] += a[r * roles + q] * g;
        }
      }
  }

  Tensor d_at(at.shape());
  Tensor dh(h.shape());
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t r = 0; r < roles; ++r) {
      const double* hin = &h[c * rt + r * frames];
      const double* duo = &du[c * rt + r * frames];
      const double* a = &at[r * frames * frames];
      double* ga = &d_at[r * frames * frames];
      double* dho = &dh[c * rt + r * frames];
      for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t tau = 0; tau < frames; ++tau) {
          if (adj_grads) ga[t * frames + tau] += duo[t] * hin[tau];
          dho[tau] += a[t * frames + tau] * duo[t];
        }
    }

  if (has_full_adjacency(variant)) {
    for (std::size_t i = 0; i < d_as.size(); ++i) grads.spatial[i] += d_as[i];
    for (std::size_t i = 0; i < d_at.size(); ++i) grads.temporal[i] += d_at[i];
  } else if (has_alpha(variant)) {
    const auto [sd, so] = diag_offdiag_sums(d_as);
    const auto [td, to] = diag_offdiag_sums(d_at);
    if (variant == 5) {
      grads.alpha[0] += (sd + td) - (so + to);
    } else {
      grads.alpha[0] += sd + td;
    }
    if (variant == 6) grads.beta[0] += so + to;
  }
  return dh;
}

std::vector<GcnLayer> build_gcn_stack(const AdjacencyConfig& config, const std::vector<std::size_t>& widths,
                                      std::size_t roles, std::size_t frames, Rng& rng) {
  validate(config);
  if (widths.empty()) fail(ErrorKind::kConfig, "gcn stack needs at least one layer");
  std::vector<std::size_t> channels{2};
  for (std::size_t i = 0; i < widths.size(); ++i) {
    channels.push_back(widths[i]);
    if (config.variant == 8 && i == 0) channels.push_back(widths[0]);
  }
  std::vector<GcnLayer> stack;
  for (std::size_t l = 0; l + 1 < channels.size(); ++l) {
    GcnLayer layer;
    layer.adjacency = build_adjacency(config, roles, frames, rng);
    layer.weight = Tensor(Shape{channels[l], channels[l + 1]});
    const double bound = 1.0 / std::sqrt(static_cast<double>(channels[l]));
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    layer.tanh_activation = l + 2 < channels.size();
    stack.push_back(std::move(layer));
  }
  return stack;
}

Tensor rolegcn_forward(const std::vector<GcnLayer>& stack, const Tensor& x_role, GcnStackCache* cache) {
  if (stack.empty()) fail(ErrorKind::kConfig, "empty gcn stack");
  if (x_role.rank() != 3 || x_role.dim(0) != stack.front().in_channels()) {
    fail(ErrorKind::kDimension, "rolegcn: input " + x_role.shape_string() + " does not match first layer with " +
                                    std::to_string(stack.front().in_channels()) + " channels");
  }
  if (cache) cache->layers.resize(stack.size());
  Tensor h = x_role;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    if (l > 0 && stack[l].in_channels() != stack[l - 1].out_channels()) {
      fail(ErrorKind::kDimension, "rolegcn: layer " + std::to_string(l) + " expects " +
                                      std::to_string(stack[l].in_channels()) + " channels, previous layer emits " +
                                      std::to_string(stack[l - 1].out_channels()));
    }
    h = gcn_layer_forward(stack[l], h, cache ? &cache->layers[l] : nullptr);
  }
  return h;
}

Tensor rolegcn_backward(const std::vector<GcnLayer>& stack, const GcnStackCache& cache, const Tensor& d_out,
                        std::vector<GcnGrads>& grads) {
  Tensor d = d_out;
  for (std::size_t l = stack.size(); l-- > 0;) d = gcn_layer_backward(stack[l], cache.layers[l], d, grads[l]);
  return d;
}

}  // namespace rolfor
