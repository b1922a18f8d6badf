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

#include "rolfor/rng.hpp"
#include "rolfor/softsort.hpp"
#include "rolfor/tensor.hpp"

namespace rolfor {

// Shared per-player MLP: flattened ball-relative observed trajectory
// (kObsFrames x 2 inputs) -> 32 -> 32 -> 1, tanh hidden units.
struct ScoreNetwork {
  Tensor w0{Shape{10, 32}};
  Tensor b0{Shape{32}};
  Tensor w1{Shape{32, 32}};
  Tensor b1{Shape{32}};
  Tensor w2{Shape{32, 1}};
  Tensor b2{Shape{1}};

  static ScoreNetwork initialized(Rng& rng);

  template <typename F>
  void for_each_param(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_param(F&& f) const { visit(*this, f); }

  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    f("score.w0", s.w0);
    f("score.b0", s.b0);
    f("score.w1", s.w1);
    f("score.b1", s.b1);
    f("score.w2", s.w2);
    f("score.b2", s.b2);
  }

  friend bool operator==(const ScoreNetwork&, const ScoreNetwork&) = default;
};

// Player coordinates relative to the ball over the observed frames, in units
// of kScoreFeatureScale meters. X_in: [T, A, 2] -> [A-1, T*2].
inline constexpr double kScoreFeatureScale = 10.0;
Tensor score_features(const Tensor& x_in);

struct ScoreCache {
  Tensor input;    // [P, 10]
  Tensor hidden0;  // tanh outputs
  Tensor hidden1;
};

// features [P, 10] -> scores [P]
std::vector<double> score_forward(const ScoreNetwork& net, const Tensor& features, ScoreCache* cache = nullptr);
// Accumulates parameter gradients into grad; returns d/dfeatures.
Tensor score_backward(const ScoreNetwork& net, const ScoreCache& cache, std::span<const double> d_scores,
                      ScoreNetwork& grad);

/// One score per player (ball excluded), shared weights across players.
std::vector<double> score_players(const ScoreNetwork& net, const Tensor& x_in);

// Slot-by-player weights: row k softly selects the player whose rank is k+1.
struct SoftPermutation {
  Tensor weights;  // [n, n]
  double scale = 0.1;
  bool normalized = true;
};

/// M[k][i] = exp(-((k + 1 - s_i) / scale)^2), rows optionally normalized
/// (computed as a row softmax of the log-weights).
SoftPermutation build_soft_permutation(std::span<const double> ranks, double scale, bool normalized = true);
/// d/d ranks given dM.
std::vector<double> build_soft_permutation_backward(std::span<const double> ranks, const SoftPermutation& m,
                                                    const Tensor& d_weights);

/// Hard permutation matrix for order[k] = player placed in slot k.
SoftPermutation permutation_matrix(std::span<const std::size_t> order);

/// Per frame: slot k <- sum_i M[k][i] * player i. Agents past the player
/// count (the ball) pass through unchanged. x: [T, A, 2].
Tensor reshuffle(const SoftPermutation& m, const Tensor& x);
struct ShuffleGrads {
  Tensor d_weights;
  Tensor d_input;
};
ShuffleGrads reshuffle_backward(const SoftPermutation& m, const Tensor& x, const Tensor& d_out);

/// Applies M^T: inverse of reshuffle when M is a hard permutation.
Tensor deshuffle(const SoftPermutation& m, const Tensor& y);
ShuffleGrads deshuffle_backward(const SoftPermutation& m, const Tensor& y, const Tensor& d_out);

// Ordering implied by ranks: slot k holds the player with the (k+1)-th
// smallest rank, ties by player index.
std::vector<std::size_t> order_from_ranks(std::span<const double> ranks);

}  // namespace rolfor
