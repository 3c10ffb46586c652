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

#include "procwriter/coherence.hpp"
#include "procwriter/generator.hpp"
#include "procwriter/prompting.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

// How the stop literal takes part in re-ranking.
enum class StopPolicy {
  // The stop candidate is re-ranked like any other, with the coherence of
  // the sequence decoded so far (0 when nothing has been decoded yet).
  kRerank,
  // A top-1 stop ends decoding; otherwise stop candidates are dropped and
  // the rest are re-ranked.
  kBypass,
};

struct DecodingConfig {
  std::size_t k = 5;
  double lambda = 1.0;
  std::size_t max_steps = 20;
  bool use_coherence = true;
  StopPolicy stop_policy = StopPolicy::kRerank;
  std::string stop_literal = std::string(kStopLiteral);

  void validate() const;
};

struct ScoredCandidate {
  Candidate candidate;
  double coherence = 0.0;
  double combined = 0.0;  // candidate.logprob + lambda * coherence
};

enum class StopReason { kStopLiteral, kMaxSteps };
std::string_view to_string(StopReason r);

struct IterationRecord {
  std::string prompt;
  std::vector<ScoredCandidate> candidates;
  std::size_t chosen = 0;
};

struct DecodeTrace {
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::kStopLiteral;
};

struct DecodeResult {
  SubEventSequence sequence;
  DecodeTrace trace;
};

// argmax of logprob + lambda * coherence; ties go to the lower index.
// Throws InvalidArgument on empty or mismatched inputs.
std::size_t rerank(std::span<const Candidate> candidates,
                   std::span<const double> coherence, double lambda);

// Iterative step-by-step decoding. `scorer` may be null only when
// config.use_coherence is false. Backend and scorer failures are rethrown
// as Error with the 1-based iteration index prefixed.
DecodeResult decode(const Process& process, const Generator& generator,
                    const CoherenceScorer* scorer, const DecodingConfig& config);

}  // namespace procwriter
