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

#include <cstdint>
#include <span>
#include <vector>

#include "rolfor/ops.hpp"

namespace rolfor {

struct GradCheckOptions {
  double step = 1e-5;
  double kink_radius = 1e-4;
  std::uint64_t seed = 0x5eed;
};

struct GradCheckReport {
  bool passed = false;
  // Point lies within kink_radius of a non-differentiable point; nothing
  // was compared and the point does not count as a failure.
  bool skipped = false;
  double kink_distance = 0.0;
  // Per input: max |analytic - numeric| over elements, divided by the
  // largest magnitude seen in either gradient of that input.
  std::vector<double> max_rel_error;

  double worst() const;
};

/// Compares the op's vector-Jacobian product against central finite
/// differences along a random output cotangent.
GradCheckReport check_gradients(const DifferentiableOp& op, std::span<const Tensor> inputs, double tolerance,
                                const GradCheckOptions& options = {});

}  // namespace rolfor
