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

#include "rolfor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rolfor/errors.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (double e : max_rel_error) w = std::max(w, e);
  return w;
}

namespace {

std::vector<Tensor> evaluate(const DifferentiableOp& op, std::span<const Tensor> inputs) {
  auto out = op.forward(inputs);
  for (const auto& t : out) {
    if (!t.all_finite()) fail(ErrorKind::kEvaluation, op.name + ": non-finite forward output");
  }
  return out;
}

double project(const std::vector<Tensor>& outputs, const std::vector<Tensor>& cotangents) {
  double s = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) s += dot(outputs[i].data(), cotangents[i].data());
  return s;
}

}  // namespace

GradCheckReport check_gradients(const DifferentiableOp& op, std::span<const Tensor> inputs, double tolerance,
                                const GradCheckOptions& options) {
  GradCheckReport report;
  report.kink_distance =
      op.kink_distance ? op.kink_distance(inputs) : std::numeric_limits<double>::infinity();
  if (report.kink_distance < options.kink_radius) {
    report.skipped = true;
    report.passed = true;
    return report;
  }

  const auto outputs = evaluate(op, inputs);
  Rng rng(options.seed);
  std::vector<Tensor> cotangents;
  for (const auto& out : outputs) {
    Tensor c(out.shape());
    for (double& v : c.data()) v = rng.uniform(-1.0, 1.0);
    cotangents.push_back(std::move(c));
  }
  const auto analytic = op.backward(inputs, cotangents);
  if (analytic.size() != inputs.size()) {
    fail(ErrorKind::kDimension, op.name + ": backward returned wrong number of cotangents");
  }

  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  report.passed = true;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    require_same_shape(analytic[j], inputs[j], "check_gradients analytic cotangent");
    double max_diff = 0.0, scale = 0.0;
    for (std::size_t e = 0; e < probe[j].size(); ++e) {
      const double x0 = probe[j][e];
      probe[j][e] = x0 + options.step;
      const double up = project(evaluate(op, probe), cotangents);
      probe[j][e] = x0 - options.step;
      const double down = project(evaluate(op, probe), cotangents);
      probe[j][e] = x0;
      const double numeric = (up - down) / (2.0 * options.step);
      max_diff = std::max(max_diff, std::abs(numeric - analytic[j][e]));
      scale = std::max({scale, std::abs(numeric), std::abs(analytic[j][e])});
    }
    const double rel = scale > 0.0 ? max_diff / scale : 0.0;
    report.max_rel_error.push_back(rel);
    if (!(rel <= tolerance)) report.passed = false;
  }
  return report;
}

}  // namespace rolfor
