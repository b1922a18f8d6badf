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
#include <vector>

#include "rolfor/ops.hpp"

namespace rolfor {

// Half-open index range [begin, end) sharing one fitted value.
struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Block&, const Block&) = default;
};

struct IsotonicSolution {
  std::vector<double> values;  // non-increasing
  std::vector<Block> blocks;   // ordered, covering every index once
};

/// argmin over non-increasing v of sum (v_i - y_i)^2, by pool-adjacent-violators.
IsotonicSolution isotonic_decreasing(std::span<const double> y);

/// Vector-Jacobian product of isotonic_decreasing: averages the cotangent
/// within each block.
std::vector<double> isotonic_backward(std::span<const Block> blocks, std::span<const double> cotangent);

// Convex hull of all permutations of the anchor vector.
class Permutahedron {
 public:
  // Anchor (n, n-1, ..., 1).
  explicit Permutahedron(std::size_t n);
  // Arbitrary strictly decreasing anchor.
  explicit Permutahedron(std::vector<double> anchor);

  std::size_t size() const noexcept { return anchor_.size(); }
  std::span<const double> anchor() const noexcept { return anchor_; }

 private:
  std::vector<double> anchor_;
};

struct Projection {
  std::vector<double> point;
  std::vector<std::size_t> sort_permutation;  // indices of z, descending by value, stable
  std::vector<Block> blocks;                  // isotonic blocks in sorted coordinates
  std::vector<double> isotonic_values;        // sorted coordinates
};

/// Euclidean projection of z onto the permutahedron. Ties in z keep their
/// original index order.
Projection project_permutahedron_full(std::span<const double> z, const Permutahedron& w);
std::vector<double> project_permutahedron(std::span<const double> z, const Permutahedron& w);

// VJP of the projection with respect to z.
std::vector<double> project_permutahedron_backward(const Projection& proj, std::span<const double> cotangent);

struct SoftRankResult {
  std::vector<double> ranks;  // ascending convention: rank 1 = smallest theta
  double epsilon = 1.0;
  std::vector<std::size_t> sort_permutation;
  std::vector<Block> blocks;
  std::vector<double> isotonic_values;
};

/// Quadratically regularized ranks. epsilon -> 0 recovers hard ascending ranks,
/// epsilon -> infinity sends every rank to (n + 1) / 2.
SoftRankResult soft_rank(std::span<const double> theta, double epsilon);

/// Exact vector-Jacobian product of soft_rank with respect to theta.
std::vector<double> soft_rank_backward(const SoftRankResult& result, std::span<const double> cotangent);

// Fraction of coordinates that sit in blocks of size > 1.
double pooled_fraction(std::span<const Block> blocks);

// Distance (in theta units) to the nearest change of sort order or block
// structure, where soft_rank is not differentiable.
double soft_rank_kink_distance(const SoftRankResult& result);
// Same for a raw isotonic input y.
double isotonic_kink_distance(std::span<const double> y, const IsotonicSolution& sol);

DifferentiableOp soft_rank_op(double epsilon);
DifferentiableOp isotonic_op();

}  // namespace rolfor
