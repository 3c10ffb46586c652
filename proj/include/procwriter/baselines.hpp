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
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/embedding.hpp"
#include "procwriter/generator.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

inline constexpr std::string_view kStepSeparator = " || ";

std::string join_steps(const SubEventSequence& seq,
                       std::string_view separator = kStepSeparator);

// Splits on the separator, trims, drops blank segments and stop literals.
SubEventSequence split_steps(std::string_view text,
                             std::string_view separator = kStepSeparator);

// "How to {title}?"
std::string all_at_once_prompt(const Process& process);

// One whole-sequence pair per reference.
std::vector<TrainingPair> all_at_once_pairs(const ProcessExample& example);

// Single generator call; the top candidate is split into steps.
SubEventSequence all_at_once_decode(const Process& process,
                                    const Generator& generator);

// Returns a reference of the training process whose title embedding is
// most cosine-similar to the query title. Similarity ties go to the lowest
// index; among several references one is picked uniformly using `seed`.
// Throws InvalidArgument on an empty training split.
SubEventSequence top1_similar(const Process& process, const DatasetSplit& train,
                              const Embedder& embedder, std::uint64_t seed);

// Same, with precomputed title embeddings (one per training example).
SubEventSequence top1_similar(std::span<const double> query,
                              const DatasetSplit& train,
                              std::span<const std::vector<double>> title_embeddings,
                              std::uint64_t seed);

// "How to {title}? Generate the events to solve it."
std::string zero_shot_prompt(const Process& process);

// Sentence segmentation on . ! ? followed by whitespace, and on newlines.
// Terminal punctuation stays with its sentence.
std::vector<std::string> segment_sentences(std::string_view text);

SubEventSequence zero_shot_decode(const Process& process,
                                  const Generator& generator);

}  // namespace procwriter
