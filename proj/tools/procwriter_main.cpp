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

// Command-line front end. Everything goes through the C API.

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "procwriter/procwriter.h"

namespace {

int report(pw_status status) {
  if (status != PW_OK) std::cerr << "procwriter: " << pw_status_name(status) << ": " << pw_last_error() << '\n';
  return static_cast<int>(status);
}

// Prints an owned C string and releases it.
void emit(char* s) {
  std::cout << s << '\n';
  pw_string_free(s);
}

struct ConfigFlags {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> values;
  bool trace = false;
  bool no_coherence = false;
};

void add_value(CLI::App* app, ConfigFlags& flags, const std::string& flag, const std::string& key,
               const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&flags, key](const std::string& v) { flags.values.emplace_back(key, v); }, help);
}

pw_status build_config(const ConfigFlags& flags, pw_config** out) {
  pw_status s = flags.config_file.empty() ? pw_config_new(out) : pw_config_load(flags.config_file.c_str(), out);
  if (s != PW_OK) return s;
  for (const auto& [k, v] : flags.values) {
    if ((s = pw_config_set(*out, k.c_str(), v.c_str())) != PW_OK) return s;
  }
  if (flags.trace && (s = pw_config_set(*out, "trace", "true")) != PW_OK) return s;
  if (flags.no_coherence && (s = pw_config_set(*out, "use_coherence", "false")) != PW_OK) return s;
  return PW_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procwriter: step-by-step procedure generation with coherence re-ranking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pw_version()));

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "Fine-tune, decode and evaluate one configuration");
  run->add_option("--config", run_flags.config_file, "Base config file (key = value lines)");
  add_value(run, run_flags, "--method", "method", "subeventwriter | all-at-once | top1-similar | zero-shot");
  add_value(run, run_flags, "--dataset", "dataset", "Directory with train/valid/test.jsonl");
  add_value(run, run_flags, "--split", "split", "Split to decode (default test)");
  add_value(run, run_flags, "--backend", "backend", "Generation backend (mock, bow-softmax)");
  add_value(run, run_flags, "--scorer", "scorer", "Coherence scorer (oracle, logistic)");
  add_value(run, run_flags, "--k", "k", "Candidates per iteration (default 5)");
  add_value(run, run_flags, "--lambda", "lambda", "Coherence weight (default 1)");
  add_value(run, run_flags, "--max-steps", "max_steps", "Step cap (default 20)");
  add_value(run, run_flags, "--stop-policy", "stop_policy", "rerank | bypass");
  add_value(run, run_flags, "--epochs", "epochs", "Training epochs");
  add_value(run, run_flags, "--lr", "lr", "Generator learning rate");
  add_value(run, run_flags, "--batch-size", "batch_size", "Minibatch size");
  add_value(run, run_flags, "--scorer-lr", "scorer_lr", "Scorer learning rate");
  add_value(run, run_flags, "--scorer-epochs", "scorer_epochs", "Scorer epochs");
  add_value(run, run_flags, "--n-negatives", "n_negatives", "Coherence negatives per corruption type");
  add_value(run, run_flags, "--fewshot", "fewshot", "Subsample the training split to N examples");
  add_value(run, run_flags, "--seed", "seed", "Random seed");
  add_value(run, run_flags, "--out", "out", "Output directory for run artifacts");
  add_value(run, run_flags, "--mock-script", "mock_script", "JSON script for the mock backend");
  add_value(run, run_flags, "--embed-dim", "embed_dim", "Hash embedding dimension");
  run->add_flag("--trace", run_flags.trace, "Write trace.jsonl with every decoding iteration");
  run->add_flag("--no-coherence", run_flags.no_coherence, "Disable coherence re-ranking");

  std::string grid_config, grid_file;
  auto* grid = app.add_subcommand("grid", "Grid search on the validation split");
  grid->add_option("--config", grid_config, "Base config file")->required();
  grid->add_option("--grid", grid_file, "Grid file (key = v1, v2 lines)")->required();

  std::string eval_predictions, eval_dataset, eval_split = "test";
  auto* eval = app.add_subcommand("eval", "Score a predictions file");
  eval->add_option("--predictions", eval_predictions, "predictions.jsonl")->required();
  eval->add_option("--dataset", eval_dataset, "Dataset directory")->required();
  eval->add_option("--split", eval_split, "Split the predictions belong to");

  std::string synth_dataset, synth_out, synth_split = "train";
  std::size_t synth_n = 2;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth-coherence", "Write a synthetic coherence dataset");
  synth->add_option("--dataset", synth_dataset, "Dataset directory")->required();
  synth->add_option("--split", synth_split, "Source split (default train)");
  synth->add_option("--n-negatives", synth_n, "Negatives per corruption type");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    pw_config* config = nullptr;
    pw_status s = build_config(run_flags, &config);
    char* result = nullptr;
    if (s == PW_OK) s = pw_run_experiment(config, &result);
    pw_config_free(config);
    if (s != PW_OK) return report(s);
    const auto parsed = nlohmann::json::parse(result);
    for (const auto& w : parsed.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
    emit(result);
    return 0;
  }
  if (*grid) {
    pw_config* config = nullptr;
    pw_status s = pw_config_load(grid_config.c_str(), &config);
    char* result = nullptr;
    if (s == PW_OK) s = pw_grid_search(config, grid_file.c_str(), &result);
    pw_config_free(config);
    if (s != PW_OK) return report(s);
    emit(result);
    return 0;
  }
  if (*eval) {
    char* metrics = nullptr;
    pw_status s = pw_evaluate_predictions(eval_predictions.c_str(), eval_dataset.c_str(), eval_split.c_str(), &metrics);
    if (s != PW_OK) return report(s);
    emit(metrics);
    return 0;
  }
  if (*synth) {
    std::size_t written = 0;
    pw_status s = pw_synth_coherence(synth_dataset.c_str(), synth_split.c_str(), synth_n, synth_seed, synth_out.c_str(),
                                     &written);
    if (s != PW_OK) return report(s);
    std::cout << "wrote " << written << " coherence examples to " << synth_out << '\n';
    return 0;
  }
  return 0;
}
