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

#ifndef ROLFOR_ROLFOR_H_
#define ROLFOR_ROLFOR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ROLFOR_BUILDING_LIBRARY)
#define ROLFOR_API __attribute__((visibility("default")))
#else
#define ROLFOR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rolfor_status {
  ROLFOR_OK = 0,
  ROLFOR_ERR_DIMENSION = 1,
  ROLFOR_ERR_DOMAIN = 2,
  ROLFOR_ERR_SIZE = 3,
  ROLFOR_ERR_PARSE = 4,
  ROLFOR_ERR_VALIDATION = 5,
  ROLFOR_ERR_IO = 6,
  ROLFOR_ERR_CONFIG = 7,
  ROLFOR_ERR_DATA = 8,
  ROLFOR_ERR_BOUNDS = 9,
  ROLFOR_ERR_EVALUATION = 10,
  ROLFOR_ERR_INVALID_ARGUMENT = 11,
  ROLFOR_ERR_INTERNAL = 12
} rolfor_status;

/* Agent layout and frame counts shared by every sequence. */
#define ROLFOR_AGENTS 11
#define ROLFOR_PLAYERS 10
#define ROLFOR_OBS_FRAMES 5
#define ROLFOR_FUT_FRAMES 10
#define ROLFOR_TOTAL_FRAMES 15

/* Message for the last failing call on this thread ("" if none). */
ROLFOR_API const char* rolfor_last_error(void);
ROLFOR_API const char* rolfor_status_string(rolfor_status status);
ROLFOR_API const char* rolfor_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
ROLFOR_API void rolfor_free_string(char* text);

/* ---- datasets ---------------------------------------------------------- */

typedef struct rolfor_dataset rolfor_dataset;

typedef struct rolfor_synth_config {
  size_t n_sequences;
  uint64_t seed;
  double pass_probability;
  double defender_gain;
  double noise_sigma;
} rolfor_synth_config;

ROLFOR_API void rolfor_synth_config_default(rolfor_synth_config* config);
ROLFOR_API rolfor_status rolfor_dataset_generate(const rolfor_synth_config* config, rolfor_dataset** out);
ROLFOR_API rolfor_status rolfor_dataset_load(const char* path, rolfor_dataset** out);
ROLFOR_API rolfor_status rolfor_dataset_save(const rolfor_dataset* dataset, const char* path);
ROLFOR_API void rolfor_dataset_free(rolfor_dataset* dataset);
ROLFOR_API rolfor_status rolfor_dataset_size(const rolfor_dataset* dataset, size_t* out);
/* Copies frames of sequence `index` ([15][11][2] row-major) into out. */
ROLFOR_API rolfor_status rolfor_dataset_frames(const rolfor_dataset* dataset, size_t index, double* out,
                                               size_t capacity);
ROLFOR_API rolfor_status rolfor_dataset_sequence_id(const rolfor_dataset* dataset, size_t index, char** out);
/* New dataset holding sequences [begin, end). */
ROLFOR_API rolfor_status rolfor_dataset_slice(const rolfor_dataset* dataset, size_t begin, size_t end,
                                              rolfor_dataset** out);
/* train / val / test sizes of the seeded split, written into counts[3]; with
   parts != NULL the three parts are returned as new datasets. */
ROLFOR_API rolfor_status rolfor_dataset_split(const rolfor_dataset* dataset, uint64_t seed, size_t counts[3],
                                              rolfor_dataset* parts[3]);

/* ---- numeric building blocks ------------------------------------------- */

ROLFOR_API rolfor_status rolfor_soft_rank(const double* theta, size_t n, double epsilon, double* ranks_out,
                                          double* pooled_fraction_out);
ROLFOR_API rolfor_status rolfor_soft_rank_vjp(const double* theta, size_t n, double epsilon,
                                              const double* cotangent, double* out);
/* ordering: "none", "ball_distance", "ball_distance_marking", "oracular_future". */
ROLFOR_API rolfor_status rolfor_order_players(const rolfor_dataset* dataset, size_t index, const char* ordering,
                                              uint64_t seed, size_t out[ROLFOR_PLAYERS]);
/* spec: a perturbation or a '+'-joined list, e.g. "light_swap+light_insert". */
ROLFOR_API rolfor_status rolfor_perturb(const char* spec, uint64_t seed, const size_t* order, size_t n,
                                        size_t* out);
/* pred, gt: [frames][players][2]. */
ROLFOR_API rolfor_status rolfor_displacement_errors(const double* pred, const double* gt, size_t frames,
                                                    size_t players, double* ade_out, double* fde_out);
ROLFOR_API rolfor_status rolfor_topk_accuracy(const size_t* pred_order, const size_t* true_order, size_t n,
                                              size_t k, double* out);

/* ---- models ------------------------------------------------------------ */

typedef struct rolfor_model rolfor_model;

/* Receives one progress line at a time during training. */
typedef void (*rolfor_log_fn)(const char* line, void* user);

/* config_json: experiment configuration (see README for keys). On success
   *model_out holds the trained model and, if history_csv != NULL, the
   per-epoch loss history. */
ROLFOR_API rolfor_status rolfor_train(const char* config_json, const rolfor_dataset* train, rolfor_log_fn log,
                                      void* user, rolfor_model** model_out, char** history_csv);
ROLFOR_API rolfor_status rolfor_model_load(const char* path, rolfor_model** out);
ROLFOR_API rolfor_status rolfor_model_save(const rolfor_model* model, const char* path);
ROLFOR_API void rolfor_model_free(rolfor_model* model);
ROLFOR_API rolfor_status rolfor_model_config(const rolfor_model* model, char** config_json);
/* Run identifier derived from the configuration contents. */
ROLFOR_API rolfor_status rolfor_config_run_id(const char* config_json, char** out);
ROLFOR_API rolfor_status rolfor_config_normalize(const char* config_json, char** out);

/* Forecast for sequence `index`: [10][10][2] meters into out. */
ROLFOR_API rolfor_status rolfor_predict(const rolfor_model* model, const rolfor_dataset* dataset, size_t index,
                                        double* out, size_t capacity);

/* Metrics CSV (run_id,variant,ordering,ade,fde,topk1,topk3,topk5,topk10,seed)
   with the clean row first and one row per comma-separated perturbation spec.
   perturb_specs may be NULL or "". */
ROLFOR_API rolfor_status rolfor_evaluate(const rolfor_model* model, const rolfor_dataset* dataset,
                                         const char* perturb_specs, uint64_t perturb_seed, char** csv_out);

/* CSV epsilon,ordernn_grad_norm,gcn_grad_norm,pooled_fraction. */
ROLFOR_API rolfor_status rolfor_gradient_probe(const rolfor_model* model, const rolfor_dataset* batch,
                                               const double* epsilons, size_t n, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* ROLFOR_ROLFOR_H_ */
