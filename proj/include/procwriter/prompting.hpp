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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/text.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

// "How to {title}? Step 1: {e1} ... Step i: {ei} Step i+1: {mask}"
struct PromptTemplate {
  std::string question_prefix = "How to ";
  std::string question_suffix = "?";
  std::string step_prefix = "Step ";
  std::string step_separator = ": ";
  // Supplied by the generation backend ("[M]", "<extra_id_0>", ...).
  std::string mask = "[M]";
  std::string stop_literal = std::string(kStopLiteral);

  std::string step_label(std::size_t index) const;  // 1-based
};

struct TrainingPair {
  std::string input;
  std::string output;  // a step text or the stop literal

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

std::string render_prompt(const Process& process,
                          std::span<const SubEvent> prior,
                          const PromptTemplate& tmpl = {});

// Same template without the trailing mask. Input format of the coherence
// controller. Throws InvalidArgument when `steps` is empty.
std::string render_coherence_text(const Process& process,
                                  std::span<const SubEvent> steps,
                                  const PromptTemplate& tmpl = {});

// Coherence text for `prior` followed by a not-yet-validated candidate step.
std::string render_coherence_text(const Process& process,
                                  std::span<const SubEvent> prior,
                                  std::string_view candidate,
                                  const PromptTemplate& tmpl = {});

// m + 1 pairs per reference of length m; the last one targets the stop
// literal. References are expanded in order and concatenated.
std::vector<TrainingPair> expand_training_pairs(const ProcessExample& example,
                                                const PromptTemplate& tmpl = {});

struct ParsedPrompt {
  std::string title;
  std::vector<std::string> steps;
  bool has_mask = false;  // final segment was the mask placeholder
};

// Inverse of render_prompt / render_coherence_text. Also accepts the bare
// question form "How to {title}?". Throws ParseError on malformed text or
// when a step itself contains a " Step <n>: " label.
ParsedPrompt parse_prompt(std::string_view text, const PromptTemplate& tmpl = {});

}  // namespace procwriter
