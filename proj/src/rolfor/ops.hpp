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

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rolfor/tensor.hpp"

namespace rolfor {

// Matrix product of a[m,k] and b[k,n].
Tensor matmul(const Tensor& a, const Tensor& b);
// Returns (cot * b^T, a^T * cot).
std::pair<Tensor, Tensor> matmul_backward(const Tensor& a, const Tensor& b, const Tensor& cot);

enum class Elementwise { kAdd, kMul, kTanh, kRelu, kExp, kScale };

/// Pointwise op. kAdd/kMul take two operands (either may be a one-element
/// tensor, broadcast as a scalar); the unary kinds take one; kScale
/// multiplies its single operand by `constant`.
Tensor elementwise(Elementwise kind, std::span<const Tensor> args, double constant = 0.0);
std::vector<Tensor> elementwise_backward(Elementwise kind, std::span<const Tensor> args,
                                         const Tensor& cot, double constant = 0.0);

inline Tensor add(const Tensor& a, const Tensor& b) {
  const Tensor args[] = {a, b};
  return elementwise(Elementwise::kAdd, args);
}
inline Tensor mul(const Tensor& a, const Tensor& b) {
  const Tensor args[] = {a, b};
  return elementwise(Elementwise::kMul, args);
}
inline Tensor tanh(const Tensor& a) { return elementwise(Elementwise::kTanh, {&a, 1}); }
inline Tensor relu(const Tensor& a) { return elementwise(Elementwise::kRelu, {&a, 1}); }
inline Tensor exp(const Tensor& a) { return elementwise(Elementwise::kExp, {&a, 1}); }
inline Tensor scale(const Tensor& a, double c) { return elementwise(Elementwise::kScale, {&a, 1}, c); }

Tensor transpose(const Tensor& m);
double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

// A forward map with an explicit vector-Jacobian product. The backward
// receives the original inputs and recomputes whatever context it needs.
struct DifferentiableOp {
  using Forward = std::function<std::vector<Tensor>(std::span<const Tensor>)>;
  using Backward = std::function<std::vector<Tensor>(std::span<const Tensor> inputs,
                                                     std::span<const Tensor> cotangents)>;
  // Distance from the inputs to the nearest point where the op is not
  // differentiable; absent means smooth everywhere.
  using KinkDistance = std::function<double(std::span<const Tensor>)>;

  std::string name;
  Forward forward;
  Backward backward;
  KinkDistance kink_distance;
};

DifferentiableOp matmul_op();
DifferentiableOp elementwise_op(Elementwise kind, double constant = 0.0);

}  // namespace rolfor
