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

#include "rolfor/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "rolfor/errors.hpp"
#include "rolfor/oracles.hpp"

namespace rolfor {

const char* to_string(PerturbKind kind) noexcept {
  switch (kind) {
    case PerturbKind::kLightSwap: return "light_swap";
    case PerturbKind::kLightInsert: return "light_insert";
    case PerturbKind::kHeavySwap: return "heavy_swap";
    case PerturbKind::kHeavyInsert: return "heavy_insert";
  }
  return "?";
}

PerturbKind perturb_kind_from_string(std::string_view text) {
  for (auto k : {PerturbKind::kLightSwap, PerturbKind::kLightInsert, PerturbKind::kHeavySwap, PerturbKind::kHeavyInsert}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorKind::kConfig, "unknown perturbation '" + std::string(text) + "'");
}

std::string PerturbSpec::name() const {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += "+";
    out += to_string(k);
  }
  return out;
}

void validate(const PerturbSpec& spec) {
  if (spec.kinds.empty()) fail(ErrorKind::kConfig, "perturbation spec lists no perturbation");
  if (!(spec.probability >= 0.0 && spec.probability <= 1.0)) {
    fail(ErrorKind::kConfig, "perturbation probability must lie in [0, 1]");
  }
}

PerturbSpec parse_perturb_spec(std::string_view text, double probability, std::uint64_t seed) {
  PerturbSpec spec;
  spec.probability = probability;
  spec.seed = seed;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t plus = std::min(text.find('+', start), text.size());
    spec.kinds.push_back(perturb_kind_from_string(text.substr(start, plus - start)));
    start = plus + 1;
  }
  validate(spec);
  return spec;
}

namespace {

void require_permutation(std::span<const std::size_t> order) {
  if (!is_permutation(std::vector<std::size_t>(order.begin(), order.end()), order.size())) {
    fail(ErrorKind::kValidation, "perturbation input is not a permutation");
  }
}

}  // namespace

std::vector<std::size_t> swap_positions(std::span<const std::size_t> order, std::size_t i, std::size_t j) {
  require_permutation(order);
  if (i >= order.size() || j >= order.size()) fail(ErrorKind::kBounds, "swap position out of range");
  std::vector<std::size_t> out(order.begin(), order.end());
  std::swap(out[i], out[j]);
  return out;
}

std::vector<std::size_t> insert_moved(std::span<const std::size_t> order, std::size_t from,
                                      std::ptrdiff_t displacement) {
  require_permutation(order);
  const auto n = static_cast<std::ptrdiff_t>(order.size());
  const auto to = static_cast<std::ptrdiff_t>(from) + displacement;
  if (from >= order.size() || to < 0 || to >= n) fail(ErrorKind::kBounds, "insert target out of range");
  std::vector<std::size_t> out(order.begin(), order.end());
  const std::size_t moved = out[from];
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(from));
  out.insert(out.begin() + to, moved);
  return out;
}

std::vector<std::size_t> apply_perturbation(PerturbKind kind, std::span<const std::size_t> order, Rng& rng) {
  require_permutation(order);
  const bool light = kind == PerturbKind::kLightSwap || kind == PerturbKind::kLightInsert;
  const std::size_t lo = light ? kLightMin : kHeavyMin;
  const std::size_t hi = light ? kLightMax : kHeavyMax;
  const std::size_t n = order.size();
  if (n <= hi) fail(ErrorKind::kValidation, "ordering too short for " + std::string(to_string(kind)));

  if (kind == PerturbKind::kLightSwap) {
    const auto i = static_cast<std::size_t>(rng.below(n - 1));
    return swap_positions(order, i, i + 1);
  }
  const std::size_t d = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  if (kind == PerturbKind::kHeavySwap) {
    const auto i = static_cast<std::size_t>(rng.below(n - d));
    return swap_positions(order, i, i + d);
  }
  const auto from = static_cast<std::size_t>(rng.below(n));
  const bool up_ok = from + d < n;
  const bool down_ok = from >= d;
  bool up = up_ok;
  if (up_ok && down_ok) up = rng.below(2) == 0;
  const auto signed_d = static_cast<std::ptrdiff_t>(d);
  return insert_moved(order, from, up ? signed_d : -signed_d);
}

std::vector<std::size_t> apply_perturbation(const PerturbSpec& spec, std::span<const std::size_t> order, Rng& rng) {
  validate(spec);
  require_permutation(order);
  std::vector<std::size_t> out(order.begin(), order.end());
  if (!(rng.uniform() < spec.probability)) return out;
  for (auto kind : spec.kinds) out = apply_perturbation(kind, out, rng);
  return out;
}

}  // namespace rolfor
