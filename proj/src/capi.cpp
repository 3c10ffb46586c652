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

#include "procwriter/procwriter.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "procwriter/coherence.hpp"
#include "procwriter/dataset.hpp"
#include "procwriter/error.hpp"
#include "procwriter/metrics.hpp"
#include "procwriter/prompting.hpp"
#include "procwriter/runner.hpp"
#include "procwriter/text.hpp"

struct pw_dataset {
  procwriter::DatasetSplit split;
};

struct pw_config {
  procwriter::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

pw_status fail(pw_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
pw_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PW_OK;
  } catch (const procwriter::InvalidArgument& e) {
    return fail(PW_ERR_INVALID_ARGUMENT, e.what());
  } catch (const procwriter::ParseError& e) {
    return fail(PW_ERR_PARSE, e.what());
  } catch (const procwriter::IoError& e) {
    return fail(PW_ERR_IO, e.what());
  } catch (const procwriter::NotFound& e) {
    return fail(PW_ERR_NOT_FOUND, e.what());
  } catch (const std::exception& e) {
    return fail(PW_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(PW_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw procwriter::InvalidArgument(std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* pw_version(void) { return "0.1.0"; }

const char* pw_last_error(void) { return g_last_error.c_str(); }

const char* pw_status_name(pw_status status) {
  switch (status) {
    case PW_OK: return "ok";
    case PW_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PW_ERR_PARSE: return "parse error";
    case PW_ERR_IO: return "i/o error";
    case PW_ERR_NOT_FOUND: return "not found";
    case PW_ERR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

void pw_string_free(char* s) { std::free(s); }

pw_status pw_dataset_load(const char* path, pw_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_unique<pw_dataset>();
    d->split = procwriter::load_dataset(path);
    *out = d.release();
  });
}

void pw_dataset_free(pw_dataset* dataset) { delete dataset; }

size_t pw_dataset_size(const pw_dataset* dataset) { return dataset ? dataset->split.size() : 0; }

pw_status pw_dataset_title(const pw_dataset* dataset, size_t index, char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    if (index >= dataset->split.size())
      throw procwriter::InvalidArgument("index " + std::to_string(index) + " out of range");
    *out = dup_string(dataset->split.examples[index].process().title());
  });
}

pw_status pw_dataset_subsample(const pw_dataset* dataset, size_t n, uint64_t seed, pw_dataset** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_unique<pw_dataset>();
    d->split = procwriter::subsample_fewshot(dataset->split, n, seed);
    *out = d.release();
  });
}

pw_status pw_config_new(pw_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new pw_config{};
  });
}

pw_status pw_config_load(const char* path, pw_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<pw_config>();
    c->config = procwriter::RunConfig::from_file(path);
    *out = c.release();
  });
}

void pw_config_free(pw_config* config) { delete config; }

pw_status pw_config_set(pw_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    config->config.set(key, value ? value : "");
  });
}

pw_status pw_config_to_text(const pw_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    *out = dup_string(config->config.to_text());
  });
}

pw_status pw_run_experiment(const pw_config* config, char** result_json) {
  return guarded([&] {
    require(config, "config");
    require(result_json, "result_json");
    *result_json = nullptr;
    const auto result = procwriter::run_experiment(config->config);
    nlohmann::ordered_json j = {{"run_dir", result.run_dir.string()},
                                {"metrics", nlohmann::ordered_json::parse(result.report.to_json())},
                                {"warnings", result.warnings}};
    *result_json = dup_string(j.dump());
  });
}

pw_status pw_grid_search(const pw_config* base, const char* grid_path, char** result_json) {
  return guarded([&] {
    require(base, "base");
    require(grid_path, "grid_path");
    require(result_json, "result_json");
    *result_json = nullptr;
    const auto grid = procwriter::load_grid(grid_path);
    *result_json = dup_string(procwriter::grid_search(base->config, grid).to_json());
  });
}

pw_status pw_evaluate_predictions(const char* predictions_path, const char* dataset_dir, const char* split,
                                  char** metrics_json) {
  return guarded([&] {
    require(predictions_path, "predictions_path");
    require(dataset_dir, "dataset_dir");
    require(split, "split");
    require(metrics_json, "metrics_json");
    *metrics_json = nullptr;
    *metrics_json = dup_string(procwriter::evaluate_predictions(predictions_path, dataset_dir, split).to_json());
  });
}

pw_status pw_synth_coherence(const char* dataset_dir, const char* split, size_t n_negatives, uint64_t seed,
                             const char* out_path, size_t* n_written) {
  return guarded([&] {
    require(dataset_dir, "dataset_dir");
    require(split, "split");
    require(out_path, "out_path");
    const auto n = procwriter::synthesize_coherence(dataset_dir, split, n_negatives, seed, out_path);
    if (n_written) *n_written = n;
  });
}

pw_status pw_render_prompt(const char* title, const char* const* steps, size_t n_steps, const char* mask, char** out) {
  return guarded([&] {
    require(title, "title");
    require(out, "out");
    *out = nullptr;
    if (n_steps > 0) require(steps, "steps");
    std::vector<procwriter::SubEvent> prior;
    for (size_t i = 0; i < n_steps; ++i) {
      require(steps[i], "step");
      prior.emplace_back(steps[i]);
    }
    procwriter::PromptTemplate tmpl;
    if (mask) tmpl.mask = mask;
    *out = dup_string(procwriter::render_prompt(procwriter::Process(title), prior, tmpl));
  });
}

pw_status pw_bleu(const char* prediction, const char* reference, int n, double* out) {
  return guarded([&] {
    require(prediction, "prediction");
    require(reference, "reference");
    require(out, "out");
    *out = procwriter::bleu_n(procwriter::tokenize(prediction), procwriter::tokenize(reference), n);
  });
}

pw_status pw_rouge_l(const char* prediction, const char* reference, double* out) {
  return guarded([&] {
    require(prediction, "prediction");
    require(reference, "reference");
    require(out, "out");
    *out = procwriter::rouge_l(procwriter::tokenize(prediction), procwriter::tokenize(reference));
  });
}

pw_status pw_coherence_loss(int label, double score, size_t n_negatives, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = procwriter::coherence_loss(label, score, n_negatives);
  });
}

}  // extern "C"
