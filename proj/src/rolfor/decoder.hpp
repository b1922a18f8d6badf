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

#include "rolfor/rng.hpp"
#include "rolfor/tensor.hpp"

namespace rolfor {

// Two same-padded 1-D convolutions along time, shared across roles
// (C_enc -> hidden with tanh, hidden -> 2), then a learnable T -> K time
// projection.
struct TcnDecoder {
  Tensor conv0_w;  // [hidden, C_enc, kernel]
  Tensor conv0_b;  // [hidden]
  Tensor conv1_w;  // [2, hidden, kernel]
  Tensor conv1_b;  // [2]
  Tensor proj;     // [K, T]

  static TcnDecoder initialized(std::size_t c_enc, std::size_t hidden, std::size_t kernel, std::size_t t_obs,
                                std::size_t k_fut, Rng& rng);
  static TcnDecoder zeros_like(const TcnDecoder& other);

  std::size_t kernel() const { return conv0_w.dim(2); }
  std::size_t in_channels() const { return conv0_w.dim(1); }
  std::size_t frames_in() const { return proj.dim(1); }
  std::size_t frames_out() const { return proj.dim(0); }

  template <typename F>
  void for_each_param(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_param(F&& f) const { visit(*this, f); }

  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    f("decoder.conv0_w", s.conv0_w);
    f("decoder.conv0_b", s.conv0_b);
    f("decoder.conv1_w", s.conv1_w);
    f("decoder.conv1_b", s.conv1_b);
    f("decoder.proj", s.proj);
  }

  friend bool operator==(const TcnDecoder&, const TcnDecoder&) = default;
};

struct DecoderCache {
  Tensor input;   // [C_enc, R, T]
  Tensor hidden;  // [hidden, R, T] after tanh
  Tensor conv;    // [2, R, T]
};

/// H [C_enc, R, T] -> [K, R, 2]
Tensor decode(const TcnDecoder& dec, const Tensor& h, DecoderCache* cache = nullptr);
/// Accumulates parameter gradients into grad; returns d/dH.
Tensor decode_backward(const TcnDecoder& dec, const DecoderCache& cache, const Tensor& d_out, TcnDecoder& grad);

}  // namespace rolfor
