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
#include <string>
#include <vector>

#include "rolfor/rng.hpp"
#include "rolfor/tensor.hpp"

namespace rolfor {

// Adjacency variants:
//   1 all ones, frozen            5 diag alpha, off-diag 1 - alpha
//   2 identity, frozen            6 diag alpha, off-diag beta
//   3 learnable, uniform init     7 learnable, normal init
//   4 diag alpha, off-diag 0      8 as 3 with an extra hidden layer
struct AdjacencyConfig {
  int variant = 3;
  double alpha = 1.0;  // initial value for variants 4-6
  double beta = 0.0;   // initial value for variant 6

  friend bool operator==(const AdjacencyConfig&, const AdjacencyConfig&) = default;
};

void validate(const AdjacencyConfig& config);
bool has_full_adjacency(int variant);
bool has_alpha(int variant);
bool has_beta(int variant);

// Spatial [T, R, R] acts on roles per frame; temporal [R, T, T] acts on frames
// per role. For variants 4-6 the tensors are materialized from alpha/beta.
struct AdjacencyPair {
  Tensor spatial;
  Tensor temporal;
  Tensor alpha{Shape{1}};
  Tensor beta{Shape{1}};
  AdjacencyConfig config;

  std::size_t learnable_count() const;
  // Rebuilds spatial/temporal from alpha/beta (no-op for other variants).
  void materialize();
};

AdjacencyPair build_adjacency(const AdjacencyConfig& config, std::size_t roles, std::size_t frames, Rng& rng);

struct GcnLayer {
  AdjacencyPair adjacency;
  Tensor weight;  // [C_in, C_out]
  bool tanh_activation = true;

  std::size_t in_channels() const { return weight.dim(0); }
  std::size_t out_channels() const { return weight.dim(1); }
};

struct GcnCache {
  Tensor input;     // [C_in, R, T]
  Tensor temporal;  // after time mixing
  Tensor spatial;   // after role mixing
  Tensor output;    // after channel mixing and activation
};

/// H' = act(A_s * (A_t * H) * W): time mixing per role (H[:, r, :] A_t[r]^T),
/// then role mixing per frame (A_s[t] H[:, :, t]), then channel mixing.
Tensor gcn_layer_forward(const GcnLayer& layer, const Tensor& h, GcnCache* cache = nullptr);

// Parameter gradients, same shapes as the layer's tensors.
struct GcnGrads {
  Tensor spatial;
  Tensor temporal;
  Tensor alpha{Shape{1}};
  Tensor beta{Shape{1}};
  Tensor weight;

  static GcnGrads zeros_like(const GcnLayer& layer);
};

/// Accumulates parameter gradients (only for learnable entries of the
/// configured variant) and returns d/dH.
Tensor gcn_layer_backward(const GcnLayer& layer, const GcnCache& cache, const Tensor& d_out, GcnGrads& grads);

struct GcnStackCache {
  std::vector<GcnCache> layers;
};

/// Channels 2 -> widths..., tanh on hidden layers, identity on the last.
std::vector<GcnLayer> build_gcn_stack(const AdjacencyConfig& config, const std::vector<std::size_t>& widths,
                                      std::size_t roles, std::size_t frames, Rng& rng);
Tensor rolegcn_forward(const std::vector<GcnLayer>& stack, const Tensor& x_role, GcnStackCache* cache = nullptr);
Tensor rolegcn_backward(const std::vector<GcnLayer>& stack, const GcnStackCache& cache, const Tensor& d_out,
                        std::vector<GcnGrads>& grads);

}  // namespace rolfor
