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

#include "rolfor/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "rolfor/errors.hpp"
#include "rolfor/rng.hpp"

namespace rolfor {

using nlohmann::json;

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::kNone: return "none";
    case Variant::kOracle: return "oracle";
    case Variant::kEuclDistEst: return "eucl_dist_est";
    case Variant::kE2e: return "e2e";
    case Variant::kE2eFinetune: return "e2e_finetune";
  }
  return "?";
}

Variant variant_from_string(std::string_view text) {
  for (auto v : {Variant::kNone, Variant::kOracle, Variant::kEuclDistEst, Variant::kE2e, Variant::kE2eFinetune}) {
    if (text == to_string(v)) return v;
  }
  fail(ErrorKind::kConfig, "unknown variant '" + std::string(text) +
                               "' (expected none, oracle, eucl_dist_est, e2e or e2e_finetune)");
}

const char* to_string(OutputMode m) noexcept { return m == OutputMode::kAbsolute ? "absolute" : "offset"; }

OutputMode output_mode_from_string(std::string_view text) {
  if (text == "absolute") return OutputMode::kAbsolute;
  if (text == "offset") return OutputMode::kOffset;
  fail(ErrorKind::kConfig, "unknown output mode '" + std::string(text) + "'");
}

void validate(const ExperimentConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::kConfig, std::string(name) + " must be > 0");
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::kConfig, std::string(name) + " must be >= 0");
  };
  positive(c.epsilon, "epsilon");
  positive(c.scale, "scale");
  non_negative(c.learning_rate, "learning_rate");
  non_negative(c.pretrain_learning_rate, "pretrain_learning_rate");
  non_negative(c.clip_norm, "clip_norm");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) fail(ErrorKind::kConfig, "momentum must lie in [0, 1)");
  if (c.batch_size < 1) fail(ErrorKind::kConfig, "batch_size must be >= 1");
  if (c.model.gcn_widths.empty()) fail(ErrorKind::kConfig, "gcn_widths must list at least one layer");
  for (auto w : c.model.gcn_widths)
    if (w < 1) fail(ErrorKind::kConfig, "gcn widths must be >= 1");
  if (c.model.decoder_hidden < 1) fail(ErrorKind::kConfig, "decoder_hidden must be >= 1");
  if (c.model.kernel % 2 == 0) fail(ErrorKind::kConfig, "kernel must be odd");
  validate(c.model.adjacency);
  if (c.variant == Variant::kOracle && c.ordering == OrderingKind::kNone) {
    fail(ErrorKind::kConfig, "variant oracle needs an ordering other than none");
  }
  if (c.variant == Variant::kE2eFinetune && c.init_checkpoint.empty()) {
    fail(ErrorKind::kConfig, "variant e2e_finetune requires a pretrained eucl_dist_est checkpoint (init_checkpoint)");
  }
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["variant"] = to_string(c.variant);
  j["ordering"] = to_string(c.ordering);
  j["epsilon"] = c.epsilon;
  j["scale"] = c.scale;
  j["normalize_permutation"] = c.normalize_permutation;
  j["gcn_widths"] = c.model.gcn_widths;
  j["decoder_hidden"] = c.model.decoder_hidden;
  j["kernel"] = c.model.kernel;
  j["output_mode"] = to_string(c.model.output_mode);
  j["adjacency"] = c.model.adjacency.variant;
  j["alpha"] = c.model.adjacency.alpha;
  j["beta"] = c.model.adjacency.beta;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["clip_norm"] = c.clip_norm;
  j["seed"] = c.seed;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["pretrain_learning_rate"] = c.pretrain_learning_rate;
  j["train_path"] = c.train_path;
  j["test_path"] = c.test_path;
  j["init_checkpoint"] = c.init_checkpoint;
  return j.dump();
}

ExperimentConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kConfig, "config must be a JSON object");

  static const std::set<std::string> known = {
      "variant",    "ordering",        "epsilon",         "scale",     "normalize_permutation",
      "gcn_widths", "decoder_hidden",  "kernel",          "output_mode", "adjacency",
      "alpha",      "beta",            "epochs",          "batch_size", "learning_rate",
      "momentum",   "clip_norm",       "seed",            "pretrain_epochs", "pretrain_learning_rate",
      "train_path", "test_path",       "init_checkpoint"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) fail(ErrorKind::kConfig, "unknown config key '" + item.key() + "'");
  }

  ExperimentConfig c;
  try {
    if (j.contains("variant")) c.variant = variant_from_string(j["variant"].get<std::string>());
    if (j.contains("ordering")) c.ordering = ordering_from_string(j["ordering"].get<std::string>());
    c.epsilon = j.value("epsilon", c.epsilon);
    c.scale = j.value("scale", c.scale);
    c.normalize_permutation = j.value("normalize_permutation", c.normalize_permutation);
    c.model.gcn_widths = j.value("gcn_widths", c.model.gcn_widths);
    c.model.decoder_hidden = j.value("decoder_hidden", c.model.decoder_hidden);
    c.model.kernel = j.value("kernel", c.model.kernel);
    if (j.contains("output_mode")) c.model.output_mode = output_mode_from_string(j["output_mode"].get<std::string>());
    c.model.adjacency.variant = j.value("adjacency", c.model.adjacency.variant);
    c.model.adjacency.alpha = j.value("alpha", c.model.adjacency.alpha);
    c.model.adjacency.beta = j.value("beta", c.model.adjacency.beta);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.seed = j.value("seed", c.seed);
    c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
    c.pretrain_learning_rate = j.value("pretrain_learning_rate", c.pretrain_learning_rate);
    c.train_path = j.value("train_path", c.train_path);
    c.test_path = j.value("test_path", c.test_path);
    c.init_checkpoint = j.value("init_checkpoint", c.init_checkpoint);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config value has the wrong type: ") + e.what());
  }
  validate(c);
  return c;
}

std::string config_run_id(const ExperimentConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run-%016llx", static_cast<unsigned long long>(fnv1a(to_json(config))));
  return buf;
}

}  // namespace rolfor
