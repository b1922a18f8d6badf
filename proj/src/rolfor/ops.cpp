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

#include "rolfor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rolfor/errors.hpp"

namespace rolfor {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    fail(ErrorKind::kDimension, "matmul: incompatible shapes " + a.shape_string() + " and " + b.shape_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = &b[p * n];
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) fail(ErrorKind::kDimension, "transpose: expected a matrix, got " + m.shape_string());
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = m[i * c + j];
  return out;
}

std::pair<Tensor, Tensor> matmul_backward(const Tensor& a, const Tensor& b, const Tensor& cot) {
  require_shape(cot, Shape{a.dim(0), b.dim(1)}, "matmul_backward cotangent");
  return {matmul(cot, transpose(b)), matmul(transpose(a), cot)};
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::kDimension, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

std::size_t arity(Elementwise kind) {
  return (kind == Elementwise::kAdd || kind == Elementwise::kMul) ? 2 : 1;
}

// Result shape of a binary op with scalar broadcast.
const Shape& binary_shape(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.size() == 1) return a.shape();
  if (a.size() == 1) return b.shape();
  fail(ErrorKind::kDimension, "elementwise: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

double at_broadcast(const Tensor& t, std::size_t i) { return t.size() == 1 ? t[0] : t[i]; }

// Gradient of a broadcast operand sums over the broadcast positions.
Tensor reduce_to(const Tensor& operand, const Tensor& full) {
  if (operand.shape() == full.shape()) return full;
  double s = 0.0;
  for (double v : full.data()) s += v;
  return Tensor(operand.shape(), s);
}

}  // namespace

Tensor elementwise(Elementwise kind, std::span<const Tensor> args, double constant) {
  if (args.size() != arity(kind)) fail(ErrorKind::kDimension, "elementwise: wrong operand count");
  if (arity(kind) == 2) {
    const Tensor& a = args[0];
    const Tensor& b = args[1];
    Tensor out(binary_shape(a, b));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = at_broadcast(a, i), y = at_broadcast(b, i);
      out[i] = kind == Elementwise::kAdd ? x + y : x * y;
    }
    return out;
  }
  Tensor out = args[0];
  for (double& v : out.data()) {
    switch (kind) {
      case Elementwise::kTanh: v = std::tanh(v); break;
      case Elementwise::kRelu: v = v > 0.0 ? v : 0.0; break;
      case Elementwise::kExp: v = std::exp(v); break;
      case Elementwise::kScale: v *= constant; break;
      default: break;
    }
  }
  return out;
}

std::vector<Tensor> elementwise_backward(Elementwise kind, std::span<const Tensor> args, const Tensor& cot,
                                         double constant) {
  if (args.size() != arity(kind)) fail(ErrorKind::kDimension, "elementwise_backward: wrong operand count");
  if (arity(kind) == 2) {
    const Tensor& a = args[0];
    const Tensor& b = args[1];
    require_shape(cot, binary_shape(a, b), "elementwise_backward cotangent");
    if (kind == Elementwise::kAdd) return {reduce_to(a, cot), reduce_to(b, cot)};
    Tensor ga(cot.shape()), gb(cot.shape());
    for (std::size_t i = 0; i < cot.size(); ++i) {
      ga[i] = cot[i] * at_broadcast(b, i);
      gb[i] = cot[i] * at_broadcast(a, i);
    }
    return {reduce_to(a, ga), reduce_to(b, gb)};
  }
  const Tensor& x = args[0];
  require_same_shape(x, cot, "elementwise_backward cotangent");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case Elementwise::kTanh: {
        const double t = std::tanh(x[i]);
        g[i] = cot[i] * (1.0 - t * t);
        break;
      }
      case Elementwise::kRelu: g[i] = x[i] > 0.0 ? cot[i] : 0.0; break;
      case Elementwise::kExp: g[i] = cot[i] * std::exp(x[i]); break;
      case Elementwise::kScale: g[i] = cot[i] * constant; break;
      default: break;
    }
  }
  return {g};
}

DifferentiableOp matmul_op() {
  DifferentiableOp op;
  op.name = "matmul";
  op.forward = [](std::span<const Tensor> in) { return std::vector<Tensor>{matmul(in[0], in[1])}; };
  op.backward = [](std::span<const Tensor> in, std::span<const Tensor> cot) {
    auto [ga, gb] = matmul_backward(in[0], in[1], cot[0]);
    return std::vector<Tensor>{std::move(ga), std::move(gb)};
  };
  return op;
}

DifferentiableOp elementwise_op(Elementwise kind, double constant) {
  DifferentiableOp op;
  op.name = "elementwise";
  op.forward = [kind, constant](std::span<const Tensor> in) {
    return std::vector<Tensor>{elementwise(kind, in, constant)};
  };
  op.backward = [kind, constant](std::span<const Tensor> in, std::span<const Tensor> cot) {
    return elementwise_backward(kind, in, cot[0], constant);
  };
  if (kind == Elementwise::kRelu) {
    op.kink_distance = [](std::span<const Tensor> in) {
      double d = std::numeric_limits<double>::infinity();
      for (double v : in[0].data()) d = std::min(d, std::abs(v));
      return d;
    };
  }
  return op;
}

}  // namespace rolfor
