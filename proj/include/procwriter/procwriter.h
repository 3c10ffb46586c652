// Copyright 2026 The Procwriter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the procwriter library.
 *
 * Every function returns a pw_status. On failure, pw_last_error() returns a
 * thread-local message describing the most recent error on the calling
 * thread. Strings returned through char** out-parameters are owned by the
 * caller and must be released with pw_string_free(). Handles are released
 * with their matching *_free function; passing NULL to any *_free is a no-op.
 * Out-parameters are set to NULL (or left untouched for scalars) on failure.
 */
#ifndef PROCWRITER_H_
#define PROCWRITER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROCWRITER_BUILDING)
#    define PW_API __declspec(dllexport)
#  else
#    define PW_API __declspec(dllimport)
#  endif
#else
#  define PW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pw_status {
  PW_OK = 0,
  PW_ERR_INVALID_ARGUMENT = 1,
  PW_ERR_PARSE = 2,
  PW_ERR_IO = 3,
  PW_ERR_NOT_FOUND = 4,
  PW_ERR_RUNTIME = 5
} pw_status;

typedef struct pw_dataset pw_dataset;
typedef struct pw_config pw_config;

PW_API const char* pw_version(void);
PW_API const char* pw_last_error(void);
PW_API const char* pw_status_name(pw_status status);
PW_API void pw_string_free(char* s);

/* Datasets (JSONL, one process per line). */
PW_API pw_status pw_dataset_load(const char* path, pw_dataset** out);
PW_API void pw_dataset_free(pw_dataset* dataset);
PW_API size_t pw_dataset_size(const pw_dataset* dataset);
/* Copies the title of example `index` into *out. */
PW_API pw_status pw_dataset_title(const pw_dataset* dataset, size_t index,
                                  char** out);
PW_API pw_status pw_dataset_subsample(const pw_dataset* dataset, size_t n,
                                      uint64_t seed, pw_dataset** out);

/* Run configuration: flat key/value pairs, same keys as the CLI flags. */
PW_API pw_status pw_config_new(pw_config** out);
PW_API pw_status pw_config_load(const char* path, pw_config** out);
PW_API void pw_config_free(pw_config* config);
PW_API pw_status pw_config_set(pw_config* config, const char* key,
                               const char* value);
PW_API pw_status pw_config_to_text(const pw_config* config, char** out);

/* Runs the full pipeline. *result_json receives
 * {"run_dir": ..., "metrics": {...}, "warnings": [...]}. */
PW_API pw_status pw_run_experiment(const pw_config* config,
                                   char** result_json);

/* Grid search on the validation split. `grid_path` holds
 * "key = v1, v2" lines. *result_json receives the leaderboard. */
PW_API pw_status pw_grid_search(const pw_config* base, const char* grid_path,
                                char** result_json);

PW_API pw_status pw_evaluate_predictions(const char* predictions_path,
                                         const char* dataset_dir,
                                         const char* split,
                                         char** metrics_json);

PW_API pw_status pw_synth_coherence(const char* dataset_dir, const char* split,
                                    size_t n_negatives, uint64_t seed,
                                    const char* out_path, size_t* n_written);

/* Prompt rendering with the default template and the given mask
 * (NULL selects "[M]"). */
PW_API pw_status pw_render_prompt(const char* title, const char* const* steps,
                                  size_t n_steps, const char* mask, char** out);

/* Sentence-level metrics over whitespace/punctuation tokenized text. */
PW_API pw_status pw_bleu(const char* prediction, const char* reference, int n,
                         double* out);
PW_API pw_status pw_rouge_l(const char* prediction, const char* reference,
                            double* out);

/* Balanced coherence loss for one example. */
PW_API pw_status pw_coherence_loss(int label, double score, size_t n_negatives,
                                   double* out);

#ifdef __cplusplus
}
#endif

#endif /* PROCWRITER_H_ */
