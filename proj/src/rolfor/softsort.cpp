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

#include "rolfor/softsort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rolfor/errors.hpp"

namespace rolfor {

IsotonicSolution isotonic_decreasing(std::span<const double> y) {
  if (y.empty()) fail(ErrorKind::kSize, "isotonic_decreasing: empty input");

  struct Pool {
    double sum;
    std::size_t begin;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Pool> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) fail(ErrorKind::kDomain, "isotonic_decreasing: non-finite input");
    stack.push_back({y[i], i, 1});
    // A block may not exceed its predecessor under a non-increasing fit.
    while (stack.size() > 1 && stack[stack.size() - 2].mean() < stack.back().mean()) {
      Pool top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().count += top.count;
    }
  }

  IsotonicSolution sol;
  sol.values.resize(y.size());
  sol.blocks.reserve(stack.size());
  for (const auto& p : stack) {
    const double m = p.mean();
    std::fill_n(sol.values.begin() + static_cast<std::ptrdiff_t>(p.begin), p.count, m);
    sol.blocks.push_back({p.begin, p.begin + p.count});
  }
  return sol;
}

std::vector<double> isotonic_backward(std::span<const Block> blocks, std::span<const double> cotangent) {
  const std::size_t n = blocks.empty() ? 0 : blocks.back().end;
  if (cotangent.size() != n) {
    fail(ErrorKind::kDimension, "isotonic_backward: cotangent has " + std::to_string(cotangent.size()) +
                                    " entries, solution has " + std::to_string(n));
  }
  std::vector<double> out(n);
  for (const auto& b : blocks) {
    double s = 0.0;
    for (std::size_t i = b.begin; i < b.end; ++i) s += cotangent[i];
    const double m = s / static_cast<double>(b.size());
    for (std::size_t i = b.begin; i < b.end; ++i) out[i] = m;
  }
  return out;
}

Permutahedron::Permutahedron(std::size_t n) : anchor_(n) {
  if (n == 0) fail(ErrorKind::kSize, "permutahedron of dimension 0");
  for (std::size_t i = 0; i < n; ++i) anchor_[i] = static_cast<double>(n - i);
}

Permutahedron::Permutahedron(std::vector<double> anchor) : anchor_(std::move(anchor)) {
  if (anchor_.empty()) fail(ErrorKind::kSize, "permutahedron of dimension 0");
  for (std::size_t i = 1; i < anchor_.size(); ++i) {
    if (!(anchor_[i] < anchor_[i - 1])) fail(ErrorKind::kDomain, "permutahedron anchor must be strictly decreasing");
  }
}

Projection project_permutahedron_full(std::span<const double> z, const Permutahedron& w) {
  const std::size_t n = z.size();
  if (n == 0) fail(ErrorKind::kSize, "project_permutahedron: empty input");
  if (n != w.size()) {
    fail(ErrorKind::kDimension, "project_permutahedron: input has " + std::to_string(n) +
                                    " entries, anchor has " + std::to_string(w.size()));
  }
  Projection proj;
  proj.sort_permutation.resize(n);
  std::iota(proj.sort_permutation.begin(), proj.sort_permutation.end(), std::size_t{0});
  std::stable_sort(proj.sort_permutation.begin(), proj.sort_permutation.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });

  std::vector<double> sorted(n), shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = z[proj.sort_permutation[i]];
    shifted[i] = sorted[i] - w.anchor()[i];
  }
  auto iso = isotonic_decreasing(shifted);
  proj.point.resize(n);
  for (std::size_t i = 0; i < n; ++i) proj.point[proj.sort_permutation[i]] = sorted[i] - iso.values[i];
  proj.blocks = std::move(iso.blocks);
  proj.isotonic_values = std::move(iso.values);
  return proj;
}

std::vector<double> project_permutahedron(std::span<const double> z, const Permutahedron& w) {
  return project_permutahedron_full(z, w).point;
}

std::vector<double> project_permutahedron_backward(const Projection& proj, std::span<const double> cotangent) {
  const std::size_t n = proj.sort_permutation.size();
  if (cotangent.size() != n) {
    fail(ErrorKind::kDimension, "project_permutahedron_backward: cotangent has " +
                                    std::to_string(cotangent.size()) + " entries, expected " + std::to_string(n));
  }
  // In sorted coordinates the Jacobian is I - B, with B averaging inside
  // each isotonic block.
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = cotangent[proj.sort_permutation[i]];
  const auto averaged = isotonic_backward(proj.blocks, sorted);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[proj.sort_permutation[i]] = sorted[i] - averaged[i];
  return out;
}

SoftRankResult soft_rank(std::span<const double> theta, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    fail(ErrorKind::kDomain, "soft_rank: epsilon must be positive, got " + std::to_string(epsilon));
  }
  std::vector<double> z(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i])) fail(ErrorKind::kDomain, "soft_rank: non-finite input");
    z[i] = theta[i] / epsilon;
  }
  auto proj = project_permutahedron_full(z, Permutahedron(theta.size()));
  SoftRankResult r;
  r.ranks = std::move(proj.point);
  r.epsilon = epsilon;
  r.sort_permutation = std::move(proj.sort_permutation);
  r.blocks = std::move(proj.blocks);
  r.isotonic_values = std::move(proj.isotonic_values);
  return r;
}

std::vector<double> soft_rank_backward(const SoftRankResult& result, std::span<const double> cotangent) {
  Projection proj;
  proj.sort_permutation = result.sort_permutation;
  proj.blocks = result.blocks;
  auto g = project_permutahedron_backward(proj, cotangent);
  for (double& v : g) v /= result.epsilon;
  return g;
}

double pooled_fraction(std::span<const Block> blocks) {
  std::size_t pooled = 0, total = 0;
  for (const auto& b : blocks) {
    total += b.size();
    if (b.size() > 1) pooled += b.size();
  }
  return total ? static_cast<double>(pooled) / static_cast<double>(total) : 0.0;
}

namespace {

// Gap to the nearest structural change of a PAV solution over y: two blocks
// reaching equal values, or a block prefix reaching the block mean.
double block_structure_gap(std::span<const double> y, const std::vector<Block>& blocks,
                           const std::vector<double>& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
    gap = std::min(gap, values[blocks[b].begin] - values[blocks[b + 1].begin]);
  }
  for (const auto& blk : blocks) {
    const double mean = values[blk.begin];
    double prefix = 0.0;
    for (std::size_t j = blk.begin; j + 1 < blk.end; ++j) {
      prefix += y[j];
      const double prefix_mean = prefix / static_cast<double>(j + 1 - blk.begin);
      gap = std::min(gap, mean - prefix_mean);
    }
  }
  return gap;
}

}  // namespace

double isotonic_kink_distance(std::span<const double> y, const IsotonicSolution& sol) {
  return block_structure_gap(y, sol.blocks, sol.values);
}

double soft_rank_kink_distance(const SoftRankResult& result) {
  const std::size_t n = result.ranks.size();
  // Recover the sorted, shifted isotonic input from the saved solution.
  std::vector<double> sorted_z(n), shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = result.sort_permutation[i];
    sorted_z[i] = result.ranks[p] + result.isotonic_values[i];
    shifted[i] = sorted_z[i] - static_cast<double>(n - i);
  }
  double gap = block_structure_gap(shifted, result.blocks, result.isotonic_values);
  for (std::size_t i = 0; i + 1 < n; ++i) gap = std::min(gap, sorted_z[i] - sorted_z[i + 1]);
  return gap * result.epsilon;
}

DifferentiableOp soft_rank_op(double epsilon) {
  DifferentiableOp op;
  op.name = "soft_rank";
  op.forward = [epsilon](std::span<const Tensor> in) {
    const auto r = soft_rank(in[0].data(), epsilon);
    return std::vector<Tensor>{Tensor::vector(r.ranks)};
  };
  op.backward = [epsilon](std::span<const Tensor> in, std::span<const Tensor> cot) {
    const auto r = soft_rank(in[0].data(), epsilon);
    return std::vector<Tensor>{Tensor::vector(soft_rank_backward(r, cot[0].data()))};
  };
  op.kink_distance = [epsilon](std::span<const Tensor> in) {
    return soft_rank_kink_distance(soft_rank(in[0].data(), epsilon));
  };
  return op;
}

DifferentiableOp isotonic_op() {
  DifferentiableOp op;
  op.name = "isotonic_decreasing";
  op.forward = [](std::span<const Tensor> in) {
    return std::vector<Tensor>{Tensor::vector(isotonic_decreasing(in[0].data()).values)};
  };
  op.backward = [](std::span<const Tensor> in, std::span<const Tensor> cot) {
    const auto sol = isotonic_decreasing(in[0].data());
    return std::vector<Tensor>{Tensor::vector(isotonic_backward(sol.blocks, cot[0].data()))};
  };
  op.kink_distance = [](std::span<const Tensor> in) {
    return isotonic_kink_distance(in[0].data(), isotonic_decreasing(in[0].data()));
  };
  return op;
}

}  // namespace rolfor
