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

#include "procwriter/decoder.hpp"

#include <cmath>
#include <limits>

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

void DecodingConfig::validate() const {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (max_steps == 0) throw InvalidArgument("max_steps must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a finite value >= 0");
  if (trim(stop_literal).empty()) throw InvalidArgument("stop literal is blank");
}

std::string_view to_string(StopReason r) {
  return r == StopReason::kStopLiteral ? "stop-literal" : "max-steps";
}

std::size_t rerank(std::span<const Candidate> candidates, std::span<const double> coherence,
                   double lambda) {
  if (candidates.empty()) throw InvalidArgument("rerank: no candidates");
  if (candidates.size() != coherence.size())
    throw InvalidArgument("rerank: " + std::to_string(candidates.size()) + " candidates but " +
                          std::to_string(coherence.size()) + " coherence scores");
  std::size_t best = 0;
  double best_score = candidates[0].logprob + lambda * coherence[0];
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = candidates[i].logprob + lambda * coherence[i];
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

namespace {

double checked_score(const CoherenceScorer& scorer, const std::string& text) {
  const double s = scorer.score(text);
  if (!(s >= 0.0 && s <= 1.0))
    throw InvalidArgument("scorer '" + scorer.name() + "' returned " + std::to_string(s) +
                          ", outside [0, 1]");
  return s;
}

}  // namespace

DecodeResult decode(const Process& process, const Generator& generator, const CoherenceScorer* scorer,
                    const DecodingConfig& config) {
  config.validate();
  if (config.use_coherence && scorer == nullptr)
    throw InvalidArgument("decode: coherence re-ranking requested without a scorer");

  PromptTemplate tmpl = generator.prompt_template();
  tmpl.stop_literal = config.stop_literal;
  auto is_stop = [&](const Candidate& c) { return is_stop_literal(c.text, config.stop_literal); };

  DecodeResult result;
  result.trace.stop_reason = StopReason::kMaxSteps;
  for (std::size_t iteration = 1; result.sequence.size() < config.max_steps; ++iteration) {
    try {
      IterationRecord record;
      record.prompt = render_prompt(process, result.sequence.events(), tmpl);
      std::vector<Candidate> candidates = generator.topk(record.prompt, config.k);
      if (candidates.empty()) throw Error("generator returned no candidates");
      validate_candidates(candidates, "generator '" + generator.name() + "'");

      std::vector<double> coherence(candidates.size(), 0.0);
      std::size_t chosen = 0;
      if (config.use_coherence) {
        const auto prior = result.sequence.events();
        if (config.stop_policy == StopPolicy::kBypass && is_stop(candidates[0])) {
          chosen = 0;
        } else {
          std::vector<Candidate> eligible;
          std::vector<double> eligible_scores;
          std::vector<std::size_t> index;
          for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (is_stop(candidates[j])) {
              if (config.stop_policy == StopPolicy::kBypass) continue;
              // "Stop now" is judged by the sequence it would leave behind.
              coherence[j] = prior.empty() ? 0.0 : checked_score(*scorer, render_coherence_text(process, prior, tmpl));
            } else {
              coherence[j] = checked_score(*scorer, render_coherence_text(process, prior, candidates[j].text, tmpl));
            }
            eligible.push_back(candidates[j]);
            eligible_scores.push_back(coherence[j]);
            index.push_back(j);
          }
          chosen = index[rerank(eligible, eligible_scores, config.lambda)];
        }
      }

      for (std::size_t j = 0; j < candidates.size(); ++j)
        record.candidates.push_back({candidates[j], coherence[j], candidates[j].logprob + config.lambda * coherence[j]});
      record.chosen = chosen;
      const Candidate winner = candidates[chosen];
      result.trace.iterations.push_back(std::move(record));

      if (is_stop(winner)) {
        result.trace.stop_reason = StopReason::kStopLiteral;
        break;
      }
      result.sequence.push_back(SubEvent(winner.text));
    } catch (...) {
      rethrow_with_context("decode iteration " + std::to_string(iteration) + ": ");
    }
  }
  return result;
}

}  // namespace procwriter
