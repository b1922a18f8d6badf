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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rolfor/errors.hpp"
#include "rolfor/metrics.hpp"
#include "rolfor/oracles.hpp"
#include "rolfor/perturb.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

std::vector<std::size_t> iota10() {
  std::vector<std::size_t> v(10);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double brute_ade(const Tensor& p, const Tensor& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.dim(0); ++k)
    for (std::size_t i = 0; i < p.dim(1); ++i) s += std::hypot(p(k, i, 0) - g(k, i, 0), p(k, i, 1) - g(k, i, 1));
  return s / static_cast<double>(p.dim(0) * p.dim(1));
}

double brute_fde(const Tensor& p, const Tensor& g) {
  const std::size_t k = p.dim(0) - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(1); ++i) s += std::hypot(p(k, i, 0) - g(k, i, 0), p(k, i, 1) - g(k, i, 1));
  return s / static_cast<double>(p.dim(1));
}

TEST(Ade, PerfectAndConstantOffset) {
  Rng rng(1);
  const Tensor gt = random_tensor({10, 10, 2}, rng, 0, 20);
  EXPECT_EQ(ade(gt, gt), 0.0);
  EXPECT_EQ(fde(gt, gt), 0.0);
  Tensor pred = gt;
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t p = 0; p < 10; ++p) {
      pred(k, p, 0) += 3.0;
      pred(k, p, 1) += 4.0;
    }
  EXPECT_NEAR(ade(pred, gt), 5.0, 1e-12);
  EXPECT_NEAR(fde(pred, gt), ade(pred, gt), 1e-12);
}

TEST(Fde, FinalFrameOffsetOnly) {
  Tensor gt(Shape{10, 10, 2}), pred(Shape{10, 10, 2});
  for (std::size_t p = 0; p < 10; ++p) pred(9, p, 1) = 2.0;
  EXPECT_DOUBLE_EQ(fde(pred, gt), 2.0);
  EXPECT_DOUBLE_EQ(ade(pred, gt), 0.2);
}

TEST(AdeFde, MatchBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor a = random_tensor({10, 10, 2}, rng, 0, 28), b = random_tensor({10, 10, 2}, rng, 0, 28);
    EXPECT_NEAR(ade(a, b), brute_ade(a, b), 1e-12);
    EXPECT_NEAR(fde(a, b), brute_fde(a, b), 1e-12);
  }
}

TEST(AdeFde, InvariantUnderConsistentRelabelling) {
  Rng rng(3);
  const Tensor a = random_tensor({10, 10, 2}, rng), b = random_tensor({10, 10, 2}, rng);
  auto perm = iota10();
  rng.shuffle(std::span<std::size_t>(perm));
  Tensor ap(a.shape()), bp(b.shape());
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t p = 0; p < 10; ++p)
      for (std::size_t d = 0; d < 2; ++d) {
        ap(k, p, d) = a(k, perm[p], d);
        bp(k, p, d) = b(k, perm[p], d);
      }
  EXPECT_NEAR(ade(a, b), ade(ap, bp), 1e-12);
  EXPECT_NEAR(fde(a, b), fde(ap, bp), 1e-12);
}

TEST(AdeFde, ShapeMismatch) {
  EXPECT_THROW(ade(Tensor(Shape{10, 10, 2}), Tensor(Shape{10, 9, 2})), Error);
  EXPECT_THROW(fde(Tensor(Shape{10, 10, 3}), Tensor(Shape{10, 10, 3})), Error);
}

TEST(Topk, Examples) {
  const auto id = iota10();
  EXPECT_EQ(topk_ordering_accuracy(id, id, 10), 1.0);
  auto swapped = id;
  std::swap(swapped[3], swapped[4]);
  EXPECT_EQ(topk_ordering_accuracy(swapped, id, 10), 0.8);
  std::vector<std::size_t> reversed(id.rbegin(), id.rend());
  EXPECT_EQ(topk_ordering_accuracy(reversed, id, 10), 0.0);
  EXPECT_EQ(topk_ordering_accuracy(swapped, id, 3), 1.0);
  EXPECT_EQ(topk_ordering_accuracy(swapped, id, 5), 0.6);
}

TEST(Topk, SelfAgreementIsOne) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = iota10();
    rng.shuffle(std::span<std::size_t>(p));
    for (std::size_t k : kTopkLevels) EXPECT_EQ(topk_ordering_accuracy(p, p, k), 1.0);
  }
}

TEST(Topk, RejectsBadInput) {
  const auto id = iota10();
  EXPECT_THROW(topk_ordering_accuracy(id, id, 0), Error);
  EXPECT_THROW(topk_ordering_accuracy(id, id, 11), Error);
  std::vector<std::size_t> dup = id;
  dup[0] = 1;
  EXPECT_THROW(topk_ordering_accuracy(dup, id, 10), Error);
}

TEST(MetricsCsv, HeaderAndRow) {
  MetricsRow row;
  row.run_id = "run-1";
  row.variant = "oracle";
  row.ordering = "ball_distance_marking";
  row.ade = 0.5;
  row.fde = 1.25;
  row.topk[3] = 1.0;
  row.seed = 3;
  EXPECT_EQ(metrics_csv_header(), "run_id,variant,ordering,ade,fde,topk1,topk3,topk5,topk10,seed");
  EXPECT_EQ(to_csv_line(row), "run-1,oracle,ball_distance_marking,0.5,1.25,0,0,0,1,3");
  const MetricsRow rows[] = {row, row};
  const auto csv = metrics_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(ForecastErrors, MeansOverSequences) {
  ForecastErrors e;
  e.add(1.0, 2.0);
  e.add(3.0, 6.0);
  e.finalize();
  EXPECT_DOUBLE_EQ(e.ade, 2.0);
  EXPECT_DOUBLE_EQ(e.fde, 4.0);
}

TEST(Perturb, LightSwapDefinition) {
  EXPECT_EQ(swap_positions(iota10(), 3, 4), (std::vector<std::size_t>{0, 1, 2, 4, 3, 5, 6, 7, 8, 9}));
}

TEST(Perturb, LightInsertDefinition) {
  EXPECT_EQ(insert_moved(iota10(), 2, 1), (std::vector<std::size_t>{0, 1, 3, 2, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(insert_moved(iota10(), 5, -3), (std::vector<std::size_t>{0, 1, 5, 2, 3, 4, 6, 7, 8, 9}));
  EXPECT_THROW(insert_moved(iota10(), 8, 2), Error);
}

TEST(Perturb, TopTenAccuracyPerKind) {
  Rng rng(5);
  const auto id = iota10();
  double combo_total = 0.0;
  for (int draw = 0; draw < 10000; ++draw) {
    const auto ls = apply_perturbation(PerturbKind::kLightSwap, id, rng);
    ASSERT_TRUE(is_permutation(ls, 10));
    ASSERT_EQ(topk_ordering_accuracy(ls, id, 10), 0.8);

    const double li = topk_ordering_accuracy(apply_perturbation(PerturbKind::kLightInsert, id, rng), id, 10);
    ASSERT_TRUE(std::abs(li - 0.8) < 1e-12 || std::abs(li - 0.7) < 1e-12) << li;

    // A two-element exchange only ever displaces two slots, whatever the distance.
    ASSERT_EQ(topk_ordering_accuracy(apply_perturbation(PerturbKind::kHeavySwap, id, rng), id, 10), 0.8);

    ASSERT_LE(topk_ordering_accuracy(apply_perturbation(PerturbKind::kHeavyInsert, id, rng), id, 10), 0.6 + 1e-12);

    // the insert can partly undo the swap, so only the mean is bounded
    const auto combo = apply_perturbation(parse_perturb_spec("heavy_swap+heavy_insert"), id, rng);
    ASSERT_TRUE(is_permutation(combo, 10));
    combo_total += topk_ordering_accuracy(combo, id, 10);
  }
  EXPECT_LE(combo_total / 10000.0, 0.6);
}

TEST(Perturb, HeavySwapDistance) {
  Rng rng(6);
  const auto id = iota10();
  for (int draw = 0; draw < 1000; ++draw) {
    const auto out = apply_perturbation(PerturbKind::kHeavySwap, id, rng);
    std::vector<std::size_t> moved;
    for (std::size_t i = 0; i < 10; ++i)
      if (out[i] != i) moved.push_back(i);
    ASSERT_EQ(moved.size(), 2u);
    const std::size_t d = moved[1] - moved[0];
    EXPECT_GE(d, kHeavyMin);
    EXPECT_LE(d, kHeavyMax);
  }
}

TEST(Perturb, DeterministicInSeed) {
  const auto spec = parse_perturb_spec("light_swap+light_insert");
  Rng a(7), b(7);
  for (int draw = 0; draw < 100; ++draw) EXPECT_EQ(apply_perturbation(spec, iota10(), a), apply_perturbation(spec, iota10(), b));
}

TEST(Perturb, ProbabilityZeroIsIdentity) {
  const auto spec = parse_perturb_spec("heavy_insert", 0.0);
  Rng rng(8);
  EXPECT_EQ(apply_perturbation(spec, iota10(), rng), iota10());
}

TEST(Perturb, SpecParsing) {
  const auto spec = parse_perturb_spec("heavy_swap+heavy_insert");
  EXPECT_EQ(spec.kinds.size(), 2u);
  EXPECT_EQ(spec.name(), "heavy_swap+heavy_insert");
  EXPECT_THROW(parse_perturb_spec("medium_swap"), Error);
  EXPECT_THROW(parse_perturb_spec(""), Error);
  EXPECT_THROW(parse_perturb_spec("light_swap", 1.5), Error);
}

TEST(Perturb, RejectsNonPermutation) {
  Rng rng(9);
  std::vector<std::size_t> bad{0, 0, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_THROW(apply_perturbation(PerturbKind::kLightSwap, bad, rng), Error);
}

}  // namespace
}  // namespace rolfor
