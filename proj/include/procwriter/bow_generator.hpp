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
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "procwriter/generator.hpp"

namespace procwriter {

// A trainable log-linear conditional generator over the closed set of
// outputs seen in training. The prompt is parsed back into (title, prior
// steps); candidates are retrieved through title-word and last-step
// indices, scored with hashed prompt-feature x output-feature weights and
// normalised with a softmax over the retrieved set.
//
// Small enough to fine-tune on a laptop CPU, which is all the toy-scale
// experiments need. It is not a neural seq2seq model and cannot produce
// text it has not seen.
class BowSoftmaxGenerator final : public Generator {
 public:
  struct Options {
    unsigned hash_bits = 20;
    std::size_t max_candidates = 256;
    std::string mask = "[M]";
  };

  BowSoftmaxGenerator() : BowSoftmaxGenerator(Options{}) {}
  explicit BowSoftmaxGenerator(Options options);

  std::string name() const override { return "bow-softmax"; }
  std::string mask_token() const override { return options_.mask; }

  std::vector<Candidate> topk(std::string_view prompt,
                              std::size_t k) const override;

  // Copies the current state, extends the output vocabulary and indices with
  // `pairs`, then runs minibatch SGD on softmax cross-entropy.
  std::shared_ptr<Generator> train(std::span<const TrainingPair> pairs,
                                   const TrainingConfig& config) const override;

  // Mean cross-entropy of `pairs` under the current weights.
  double loss(std::span<const TrainingPair> pairs) const;

  std::size_t vocabulary_size() const { return outputs_.size(); }

  void save(const std::filesystem::path& path) const;
  static std::shared_ptr<BowSoftmaxGenerator> load(
      const std::filesystem::path& path);

 private:
  struct PromptFeatures {
    std::vector<std::uint64_t> features;
    std::vector<std::string> title_words;
    std::uint64_t last_step = 0;  // 0 when there is no prior step
  };

  PromptFeatures featurize(std::string_view prompt) const;
  std::vector<std::uint32_t> retrieve(const PromptFeatures& pf) const;
  double score(const PromptFeatures& pf, std::uint32_t output) const;
  std::uint32_t intern(const std::string& text, bool stop);
  void index_pair(const PromptFeatures& pf, std::uint32_t output);
  std::size_t slot(std::uint64_t prompt_feature,
                   std::uint64_t output_feature) const;

  Options options_;
  std::vector<std::string> outputs_;            // id 0 is the stop literal
  std::vector<std::vector<std::uint64_t>> output_features_;
  std::vector<std::uint32_t> output_counts_;
  std::unordered_map<std::string, std::uint32_t> output_ids_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_title_word_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_last_step_;
  std::vector<float> weights_;
};

}  // namespace procwriter
