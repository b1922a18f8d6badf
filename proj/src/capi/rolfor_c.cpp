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

#include "rolfor/rolfor.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "rolfor/checkpoint.hpp"
#include "rolfor/errors.hpp"
#include "rolfor/metrics.hpp"
#include "rolfor/oracles.hpp"
#include "rolfor/perturb.hpp"
#include "rolfor/softsort.hpp"
#include "rolfor/synth.hpp"
#include "rolfor/trainer.hpp"

struct rolfor_dataset {
  std::vector<rolfor::TrajectorySequence> seqs;
};

struct rolfor_model {
  rolfor::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

rolfor_status status_of(rolfor::ErrorKind kind) {
  using rolfor::ErrorKind;
  switch (kind) {
    case ErrorKind::kDimension: return ROLFOR_ERR_DIMENSION;
    case ErrorKind::kDomain: return ROLFOR_ERR_DOMAIN;
    case ErrorKind::kSize: return ROLFOR_ERR_SIZE;
    case ErrorKind::kParse: return ROLFOR_ERR_PARSE;
    case ErrorKind::kValidation: return ROLFOR_ERR_VALIDATION;
    case ErrorKind::kIo: return ROLFOR_ERR_IO;
    case ErrorKind::kConfig: return ROLFOR_ERR_CONFIG;
    case ErrorKind::kData: return ROLFOR_ERR_DATA;
    case ErrorKind::kBounds: return ROLFOR_ERR_BOUNDS;
    case ErrorKind::kEvaluation: return ROLFOR_ERR_EVALUATION;
  }
  return ROLFOR_ERR_INTERNAL;
}

struct InvalidArgument {
  std::string message;
};

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument{what};
}

template <typename F>
rolfor_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return ROLFOR_OK;
  } catch (const InvalidArgument& e) {
    g_last_error = "invalid argument: " + e.message;
    return ROLFOR_ERR_INVALID_ARGUMENT;
  } catch (const rolfor::Error& e) {
    g_last_error = std::string(rolfor::to_string(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ROLFOR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ROLFOR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return ROLFOR_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const rolfor::TrajectorySequence& sequence_at(const rolfor_dataset* ds, std::size_t index) {
  if (index >= ds->seqs.size()) {
    rolfor::fail(rolfor::ErrorKind::kBounds, "sequence index " + std::to_string(index) + " out of range for " +
                                                 std::to_string(ds->seqs.size()) + " sequences");
  }
  return ds->seqs[index];
}

}  // namespace


extern "C" {

const char* rolfor_last_error(void) { return g_last_error.c_str(); }

const char* rolfor_status_string(rolfor_status status) {
  switch (status) {
    case ROLFOR_OK: return "ok";
    case ROLFOR_ERR_DIMENSION: return "dimension error";
    case ROLFOR_ERR_DOMAIN: return "domain error";
    case ROLFOR_ERR_SIZE: return "size error";
    case ROLFOR_ERR_PARSE: return "parse error";
    case ROLFOR_ERR_VALIDATION: return "validation error";
    case ROLFOR_ERR_IO: return "I/O error";
    case ROLFOR_ERR_CONFIG: return "config error";
    case ROLFOR_ERR_DATA: return "data error";
    case ROLFOR_ERR_BOUNDS: return "bounds error";
    case ROLFOR_ERR_EVALUATION: return "evaluation error";
    case ROLFOR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ROLFOR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rolfor_version(void) { return "1.0.0"; }

void rolfor_free_string(char* text) { delete[] text; }

void rolfor_synth_config_default(rolfor_synth_config* config) {
  if (!config) return;
  const rolfor::SynthConfig d;
  config->n_sequences = d.n_sequences;
  config->seed = d.seed;
  config->pass_probability = d.pass_probability;
  config->defender_gain = d.defender_gain;
  config->noise_sigma = d.noise_sigma;
}

rolfor_status rolfor_dataset_generate(const rolfor_synth_config* config, rolfor_dataset** out) {
  return guarded([&] {
    require(config && out, "config and out must not be null");
    rolfor::SynthConfig c;
    c.n_sequences = config->n_sequences;
    c.seed = config->seed;
    c.pass_probability = config->pass_probability;
    c.defender_gain = config->defender_gain;
    c.noise_sigma = config->noise_sigma;
    auto ds = std::make_unique<rolfor_dataset>();
    ds->seqs = rolfor::generate_synthetic(c);
    *out = ds.release();
  });
}

rolfor_status rolfor_dataset_load(const char* path, rolfor_dataset** out) {
  return guarded([&] {
    require(path && out, "path and out must not be null");
    auto ds = std::make_unique<rolfor_dataset>();
    ds->seqs = rolfor::load_sequences(path);
    *out = ds.release();
  });
}

rolfor_status rolfor_dataset_save(const rolfor_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset && path, "dataset and path must not be null");
    rolfor::save_sequences(dataset->seqs, path);
  });
}

void rolfor_dataset_free(rolfor_dataset* dataset) { delete dataset; }

rolfor_status rolfor_dataset_size(const rolfor_dataset* dataset, size_t* out) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be null");
    *out = dataset->seqs.size();
  });
}

rolfor_status rolfor_dataset_frames(const rolfor_dataset* dataset, size_t index, double* out, size_t capacity) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be null");
    const auto& frames = sequence_at(dataset, index).frames;
    require(capacity >= frames.size(), "output buffer too small");
    std::memcpy(out, frames.data().data(), frames.size() * sizeof(double));
  });
}

rolfor_status rolfor_dataset_sequence_id(const rolfor_dataset* dataset, size_t index, char** out) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be null");
    *out = dup_string(sequence_at(dataset, index).sequence_id);
  });
}

rolfor_status rolfor_dataset_slice(const rolfor_dataset* dataset, size_t begin, size_t end, rolfor_dataset** out) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be null");
    if (begin > end || end > dataset->seqs.size()) {
      rolfor::fail(rolfor::ErrorKind::kBounds, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                   ") out of range for " + std::to_string(dataset->seqs.size()) +
                                                   " sequences");
    }
    auto ds = std::make_unique<rolfor_dataset>();
    ds->seqs.assign(dataset->seqs.begin() + static_cast<std::ptrdiff_t>(begin),
                    dataset->seqs.begin() + static_cast<std::ptrdiff_t>(end));
    *out = ds.release();
  });
}

rolfor_status rolfor_dataset_split(const rolfor_dataset* dataset, uint64_t seed, size_t counts[3],
                                   rolfor_dataset* parts[3]) {
  return guarded([&] {
    require(dataset && counts, "dataset and counts must not be null");
    const auto split = rolfor::split_dataset(dataset->seqs, seed);
    const std::vector<std::string>* ids[3] = {&split.train, &split.val, &split.test};
    for (int i = 0; i < 3; ++i) counts[i] = ids[i]->size();
    if (!parts) return;
    std::vector<std::unique_ptr<rolfor_dataset>> made;
    for (int i = 0; i < 3; ++i) {
      auto ds = std::make_unique<rolfor_dataset>();
      for (const auto& id : *ids[i])
        for (const auto& s : dataset->seqs)
          if (s.sequence_id == id) {
            ds->seqs.push_back(s);
            break;
          }
      made.push_back(std::move(ds));
    }
    for (int i = 0; i < 3; ++i) parts[i] = made[i].release();
  });
}

rolfor_status rolfor_soft_rank(const double* theta, size_t n, double epsilon, double* ranks_out,
                               double* pooled_fraction_out) {
  return guarded([&] {
    require(theta && ranks_out, "theta and ranks_out must not be null");
    const auto r = rolfor::soft_rank(std::span<const double>(theta, n), epsilon);
    std::memcpy(ranks_out, r.ranks.data(), n * sizeof(double));
    if (pooled_fraction_out) *pooled_fraction_out = rolfor::pooled_fraction(r.blocks);
  });
}

rolfor_status rolfor_soft_rank_vjp(const double* theta, size_t n, double epsilon, const double* cotangent,
                                   double* out) {
  return guarded([&] {
    require(theta && cotangent && out, "theta, cotangent and out must not be null");
    const auto r = rolfor::soft_rank(std::span<const double>(theta, n), epsilon);
    const auto g = rolfor::soft_rank_backward(r, std::span<const double>(cotangent, n));
    std::memcpy(out, g.data(), n * sizeof(double));
  });
}

rolfor_status rolfor_order_players(const rolfor_dataset* dataset, size_t index, const char* ordering, uint64_t seed,
                                   size_t out[ROLFOR_PLAYERS]) {
  return guarded([&] {
    require(dataset && ordering && out, "dataset, ordering and out must not be null");
    const auto spec = rolfor::OrderingSpec::make(rolfor::ordering_from_string(ordering), seed);
    const auto order = rolfor::order_players(spec, sequence_at(dataset, index));
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = order[i];
  });
}

rolfor_status rolfor_perturb(const char* spec, uint64_t seed, const size_t* order, size_t n, size_t* out) {
  return guarded([&] {
    require(spec && order && out, "spec, order and out must not be null");
    const auto s = rolfor::parse_perturb_spec(spec, 1.0, seed);
    rolfor::Rng rng(seed);
    const auto result = rolfor::apply_perturbation(s, std::span<const std::size_t>(order, n), rng);
    for (std::size_t i = 0; i < n; ++i) out[i] = result[i];
  });
}

rolfor_status rolfor_displacement_errors(const double* pred, const double* gt, size_t frames, size_t players,
                                         double* ade_out, double* fde_out) {
  return guarded([&] {
    require(pred && gt, "pred and gt must not be null");
    const std::size_t n = frames * players * 2;
    require(n > 0, "frames and players must be positive");
    const rolfor::Tensor p(rolfor::Shape{frames, players, 2}, std::vector<double>(pred, pred + n));
    const rolfor::Tensor g(rolfor::Shape{frames, players, 2}, std::vector<double>(gt, gt + n));
    if (ade_out) *ade_out = rolfor::ade(p, g);
    if (fde_out) *fde_out = rolfor::fde(p, g);
  });
}

rolfor_status rolfor_topk_accuracy(const size_t* pred_order, const size_t* true_order, size_t n, size_t k,
                                   double* out) {
  return guarded([&] {
    require(pred_order && true_order && out, "orders and out must not be null");
    *out = rolfor::topk_ordering_accuracy(std::span<const std::size_t>(pred_order, n),
                                          std::span<const std::size_t>(true_order, n), k);
  });
}

rolfor_status rolfor_train(const char* config_json, const rolfor_dataset* train, rolfor_log_fn log, void* user,
                           rolfor_model** model_out, char** history_csv) {
  return guarded([&] {
    require(config_json && train && model_out, "config, dataset and model_out must not be null");
    const auto config = rolfor::config_from_json(config_json);
    rolfor::ProgressFn progress;
    if (log) progress = [log, user](const std::string& line) { log(line.c_str(), user); };
    auto result = rolfor::train(config, train->seqs, progress);
    auto model = std::make_unique<rolfor_model>();
    model->ckpt = std::move(result.checkpoint);
    if (history_csv) *history_csv = dup_string(rolfor::history_csv(result.history));
    *model_out = model.release();
  });
}

rolfor_status rolfor_model_load(const char* path, rolfor_model** out) {
  return guarded([&] {
    require(path && out, "path and out must not be null");
    auto model = std::make_unique<rolfor_model>();
    model->ckpt = rolfor::load_checkpoint(path);
    *out = model.release();
  });
}

rolfor_status rolfor_model_save(const rolfor_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "model and path must not be null");
    rolfor::save_checkpoint(model->ckpt, path);
  });
}

void rolfor_model_free(rolfor_model* model) { delete model; }

rolfor_status rolfor_model_config(const rolfor_model* model, char** config_json) {
  return guarded([&] {
    require(model && config_json, "model and config_json must not be null");
    *config_json = dup_string(rolfor::to_json(model->ckpt.config));
  });
}

rolfor_status rolfor_config_run_id(const char* config_json, char** out) {
  return guarded([&] {
    require(config_json && out, "config_json and out must not be null");
    *out = dup_string(rolfor::config_run_id(rolfor::config_from_json(config_json)));
  });
}

rolfor_status rolfor_config_normalize(const char* config_json, char** out) {
  return guarded([&] {
    require(config_json && out, "config_json and out must not be null");
    const auto config = rolfor::config_from_json(config_json);
    rolfor::validate(config);
    *out = dup_string(rolfor::to_json(config));
  });
}

rolfor_status rolfor_predict(const rolfor_model* model, const rolfor_dataset* dataset, size_t index, double* out,
                             size_t capacity) {
  return guarded([&] {
    require(model && dataset && out, "model, dataset and out must not be null");
    const auto pred = rolfor::predict(model->ckpt, sequence_at(dataset, index));
    require(capacity >= pred.size(), "output buffer too small");
    std::memcpy(out, pred.data().data(), pred.size() * sizeof(double));
  });
}

rolfor_status rolfor_evaluate(const rolfor_model* model, const rolfor_dataset* dataset, const char* perturb_specs,
                              uint64_t perturb_seed, char** csv_out) {
  return guarded([&] {
    require(model && dataset && csv_out, "model, dataset and csv_out must not be null");
    std::vector<rolfor::MetricsRow> rows;
    rows.push_back(rolfor::metrics_row(model->ckpt, rolfor::evaluate(model->ckpt, dataset->seqs), ""));
    const std::string specs = perturb_specs ? perturb_specs : "";
    std::size_t start = 0;
    while (start < specs.size()) {
      const std::size_t comma = std::min(specs.find(',', start), specs.size());
      const std::string item = specs.substr(start, comma - start);
      start = comma + 1;
      if (item.empty()) continue;
      const auto spec = rolfor::parse_perturb_spec(item, 1.0, perturb_seed);
      auto row = rolfor::metrics_row(model->ckpt, rolfor::evaluate(model->ckpt, dataset->seqs, &spec), "");
      row.variant += "/" + spec.name();
      rows.push_back(row);
    }
    *csv_out = dup_string(rolfor::metrics_csv(rows));
  });
}

rolfor_status rolfor_gradient_probe(const rolfor_model* model, const rolfor_dataset* batch, const double* epsilons,
                                    size_t n, char** csv_out) {
  return guarded([&] {
    require(model && batch && epsilons && csv_out, "model, batch, epsilons and csv_out must not be null");
    const auto rows = rolfor::gradient_probe(model->ckpt, batch->seqs, std::span<const double>(epsilons, n));
    *csv_out = dup_string(rolfor::probe_csv(rows));
  });
}

}  // extern "C"
