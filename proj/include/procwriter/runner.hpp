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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/decoder.hpp"
#include "procwriter/metrics.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

enum class Method { kSubeventWriter, kAllAtOnce, kTop1Similar, kZeroShot };

std::string_view to_string(Method m);
// Throws NotFound for anything outside
// {subeventwriter, all-at-once, top1-similar, zero-shot}.
Method method_from_string(std::string_view s);

struct RunConfig {
  Method method = Method::kSubeventWriter;
  std::filesystem::path dataset;
  std::string split = "test";
  std::string backend = "mock";
  std::string scorer = "oracle";

  std::size_t k = 5;
  std::optional<double> lambda;  // 1.0 when unset
  std::size_t max_steps = 20;
  bool use_coherence = true;
  StopPolicy stop_policy = StopPolicy::kRerank;

  double learning_rate = 5e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 4;
  double scorer_learning_rate = 0.5;
  std::size_t scorer_epochs = 10;
  std::size_t n_negatives = 2;
  std::optional<std::size_t> fewshot;
  std::uint64_t seed = 0;

  std::filesystem::path out = "runs";
  bool trace = false;
  std::string mock_script;
  std::size_t embed_dim = 64;

  double effective_lambda() const { return lambda.value_or(1.0); }
  DecodingConfig decoding() const;

  // Keys match the CLI flags with '-' or '_' (lr, batch-size, n-negatives,
  // no-coherence, ...). Throws InvalidArgument for unknown keys or values
  // that do not parse.
  void set(std::string_view key, std::string_view value);
  void validate() const;

  // Flat "key = value" lines; parse(to_text()) reproduces the config.
  std::string to_text() const;
  static RunConfig parse(std::istream& in);
  static RunConfig from_file(const std::filesystem::path& path);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct PredictionRecord {
  std::string process;
  SubEventSequence prediction;
  std::optional<StopReason> stop_reason;
};

void write_prediction(std::ostream& out, const PredictionRecord& record);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

struct RunResult {
  MetricReport report;
  std::filesystem::path run_dir;
  std::vector<SubEventSequence> predictions;
  std::vector<std::string> warnings;
};

// Full pipeline for one configuration: load, optional few-shot subsample,
// fine-tune, decode the configured split, evaluate and persist artifacts
// (predictions.jsonl, metrics.json, config.txt, seed.txt, run.log,
// run_state.json, trace.jsonl with --trace) into a fresh directory under
// config.out. Unknown method/backend/scorer names fail before any work. On a
// failure run_state.json records the stage that failed.
RunResult run_experiment(const RunConfig& config);

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};
using Grid = std::vector<GridAxis>;

// "key = v1, v2, v3" lines.
Grid parse_grid(std::istream& in);
Grid load_grid(const std::filesystem::path& path);

// Cross product in enumeration order (last axis varies fastest). An empty
// grid yields just `base`.
std::vector<RunConfig> expand_grid(const RunConfig& base, const Grid& grid);

// Index of the maximal text-metric sum; ties go to the earliest entry.
std::size_t select_best(std::span<const MetricReport> reports);

struct LeaderboardEntry {
  RunConfig config;
  MetricReport report;
};

struct GridResult {
  RunConfig best;
  std::vector<LeaderboardEntry> leaderboard;
  std::string to_json() const;
};

using Evaluator = std::function<MetricReport(const RunConfig&)>;

// Evaluates every cell on the validation split; the test split is never
// touched. An empty grid returns `base` with an empty leaderboard.
GridResult grid_search(const RunConfig& base, const Grid& grid,
                       const Evaluator& evaluate);
GridResult grid_search(const RunConfig& base, const Grid& grid);

// Scores a predictions JSONL file against a dataset split. Rows must align
// with the split's examples.
MetricReport evaluate_predictions(const std::filesystem::path& predictions,
                                  const std::filesystem::path& dataset_dir,
                                  std::string_view split,
                                  std::size_t embed_dim = 64);

// Builds the coherence dataset from a split and writes it as JSONL; returns
// the number of examples written.
std::size_t synthesize_coherence(const std::filesystem::path& dataset_dir,
                                 std::string_view split,
                                 std::size_t n_negatives, std::uint64_t seed,
                                 const std::filesystem::path& out);

}  // namespace procwriter
