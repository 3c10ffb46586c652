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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/embedding.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

using Tokens = std::vector<std::string>;

// Sentence-level cumulative BLEU-n (n = 1 or 2): brevity penalty times the
// geometric mean of modified 1..n-gram precisions. A precision with zero
// clipped matches is smoothed to 1 / (total + 1). Empty prediction -> 0.
double bleu_n(std::span<const std::string> prediction,
              std::span<const std::string> reference, int n);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// LCS F-measure; 0 when either side is empty.
double rouge_l(std::span<const std::string> prediction,
               std::span<const std::string> reference);

// Greedy token matching F-score over token embeddings. Precision and recall
// are clamped at 0 before the harmonic mean. Empty side -> 0.
double embed_f(std::string_view prediction, std::string_view reference,
               const Embedder& embedder);

enum class Metric { kBleu1, kBleu2, kRougeL, kEmbedF };

// Steps joined with a space.
std::string flatten(const SubEventSequence& seq);

// Maximum of the metric over references. Throws InvalidArgument on an empty
// reference list, or for kEmbedF without an embedder.
double best_of_references(const SubEventSequence& prediction,
                          std::span<const SubEventSequence> references,
                          Metric metric, const Embedder* embedder = nullptr);

struct MetricReport {
  double bleu1 = 0.0;
  double bleu2 = 0.0;
  double rougeL = 0.0;
  double embed_f = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n_examples = 0;

  double text_metric_sum() const { return bleu1 + bleu2 + rougeL + embed_f; }
  std::string to_json() const;
  static MetricReport from_json(std::string_view json);
};

// Length of the reference closest in length to `predicted` (ties: first).
std::size_t closest_reference_length(std::size_t predicted,
                                     std::span<const SubEventSequence> refs);

struct LengthErrors {
  double mae = 0.0;
  double rmse = 0.0;
};
LengthErrors length_errors(std::span<const std::size_t> predicted,
                           std::span<const std::size_t> target);

// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

// Text metrics are per-example best-of-references means scaled to 0..100;
// embed_f stays 0 without an embedder. Throws InvalidArgument when the two
// lists differ in length.
MetricReport corpus_report(std::span<const SubEventSequence> predictions,
                           std::span<const ProcessExample> examples,
                           const Embedder* embedder = nullptr);

}  // namespace procwriter
